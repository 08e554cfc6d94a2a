//! Boundary conversions between laboratory units and the internal
//! rad/µs, µs system.
//!
//! A quoted "κ/2π = 30 MHz" means κ = 2π·30 rad/µs; all `*_to_rad_per_us`
//! helpers apply the 2π factor explicitly.

use std::f64::consts::TAU;

/// Reduced Planck constant, CODATA 2018, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Ordinary frequency in Hz → angular rate in rad/µs.
pub fn hz_to_rad_per_us(hz: f64) -> f64 {
    TAU * hz * 1e-6
}

/// Angular rate in rad/µs → ordinary frequency in Hz.
pub fn rad_per_us_to_hz(w: f64) -> f64 {
    w / TAU * 1e6
}

pub fn khz_to_rad_per_us(khz: f64) -> f64 {
    hz_to_rad_per_us(khz * 1e3)
}

pub fn mhz_to_rad_per_us(mhz: f64) -> f64 {
    hz_to_rad_per_us(mhz * 1e6)
}

/// Angular rate in rad/µs → rad/s (for the SI helper formulas).
pub fn rad_per_us_to_rad_per_s(w: f64) -> f64 {
    w * 1e6
}

pub fn seconds_to_us(s: f64) -> f64 {
    s * 1e6
}

pub fn us_to_seconds(us: f64) -> f64 {
    us * 1e-6
}

//! Physical parameters of the driven optomechanical cavity and the
//! derived-quantity formulas built on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::HBAR;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    NegativeValue { name: &'static str, value: f64 },
}

/// Cavity and mechanical rates and detunings, all in rad/µs.
///
/// `kappa` is always `kappa_e + kappa_i`; construction enforces it, so the
/// fields are read-only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    kappa: f64,
    kappa_e: f64,
    kappa_i: f64,
    gamma_m: f64,
    omega_m: f64,
    delta: f64,
    big_g: f64,
}

impl PhysicalParams {
    /// `delta = None` locks the drive to the red sideband (Δ = ω_m).
    pub fn new(
        kappa_e: f64,
        kappa_i: f64,
        gamma_m: f64,
        omega_m: f64,
        delta: Option<f64>,
        big_g: f64,
    ) -> Result<Self, ModelError> {
        let kappa = kappa_e + kappa_i;
        if !(kappa > 0.0) {
            return Err(ModelError::NonPositiveRate { name: "kappa", value: kappa });
        }
        if kappa_e < 0.0 {
            return Err(ModelError::NegativeValue { name: "kappa_e", value: kappa_e });
        }
        if kappa_i < 0.0 {
            return Err(ModelError::NegativeValue { name: "kappa_i", value: kappa_i });
        }
        if !(gamma_m > 0.0) {
            return Err(ModelError::NonPositiveRate { name: "gamma_m", value: gamma_m });
        }
        if !(omega_m > 0.0) {
            return Err(ModelError::NonPositiveRate { name: "omega_m", value: omega_m });
        }
        if !(big_g >= 0.0) {
            return Err(ModelError::NegativeValue { name: "big_g", value: big_g });
        }
        Ok(Self {
            kappa,
            kappa_e,
            kappa_i,
            gamma_m,
            omega_m,
            delta: delta.unwrap_or(omega_m),
            big_g,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn kappa_e(&self) -> f64 {
        self.kappa_e
    }
    pub fn kappa_i(&self) -> f64 {
        self.kappa_i
    }
    pub fn gamma_m(&self) -> f64 {
        self.gamma_m
    }
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn big_g(&self) -> f64 {
        self.big_g
    }

    /// True in the regime γ_m ≪ κ where the Ramsey picture holds
    /// (threshold γ_m < κ/100). Advisory only.
    pub fn ramsey_valid(&self) -> bool {
        self.gamma_m < self.kappa / 100.0
    }

    pub fn with_big_g(&self, big_g: f64) -> Result<Self, ModelError> {
        Self::new(self.kappa_e, self.kappa_i, self.gamma_m, self.omega_m, Some(self.delta), big_g)
    }

    pub fn with_gamma_m(&self, gamma_m: f64) -> Result<Self, ModelError> {
        Self::new(self.kappa_e, self.kappa_i, gamma_m, self.omega_m, Some(self.delta), self.big_g)
    }

    /// Rescales κ while preserving the κ_e/κ_i split ratio.
    pub fn with_kappa_scaled(&self, factor: f64) -> Result<Self, ModelError> {
        Self::new(
            self.kappa_e * factor,
            self.kappa_i * factor,
            self.gamma_m,
            self.omega_m,
            Some(self.delta),
            self.big_g,
        )
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self, ModelError> {
        Self::new(self.kappa_e, self.kappa_i, self.gamma_m, self.omega_m, Some(delta), self.big_g)
    }
}

/// Frequency offsets entering the sideband equations, rad/µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detunings {
    /// Probe–drive offset δ = ω_p − ω_l.
    pub delta_pl: f64,
    /// x = Δ − δ.
    pub x: f64,
    /// y = ω_m − δ.
    pub y: f64,
}

/// x = Δ − δ, y = ω_m − δ.
pub fn detunings(params: &PhysicalParams, delta_pl: f64) -> Detunings {
    Detunings {
        delta_pl,
        x: params.delta() - delta_pl,
        y: params.omega_m() - delta_pl,
    }
}

/// Steady intracavity pump amplitude and static mechanical displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpState {
    pub alpha0: Complex64,
    pub beta0: Complex64,
}

/// Photon–phonon transfer rate Γ = 2G²/κ + γ_m/2.
pub fn transfer_rate(params: &PhysicalParams) -> f64 {
    2.0 * params.big_g() * params.big_g() / params.kappa() + params.gamma_m() / 2.0
}

/// Drive amplitude from incident power, E = sqrt(κ P / ħω). SI inputs
/// (W, rad/s); the result carries the sqrt(photons)/s normalization.
pub fn power_to_amplitude(power_w: f64, carrier: f64, kappa: f64) -> Result<f64, ModelError> {
    if power_w < 0.0 {
        return Err(ModelError::NegativeValue { name: "power", value: power_w });
    }
    Ok((kappa * power_w / (HBAR * carrier)).sqrt())
}

/// Single-photon coupling g = (ω_c/L)·sqrt(ħ/(m ω_m)), SI inputs, rad/s out.
pub fn single_photon_coupling(
    omega_c: f64,
    cavity_length: f64,
    eff_mass: f64,
    omega_m: f64,
) -> Result<f64, ModelError> {
    for (name, v) in [
        ("omega_c", omega_c),
        ("cavity_length", cavity_length),
        ("eff_mass", eff_mass),
        ("omega_m", omega_m),
    ] {
        if !(v > 0.0) {
            return Err(ModelError::NonPositiveRate { name, value: v });
        }
    }
    Ok(omega_c / cavity_length * (HBAR / (eff_mass * omega_m)).sqrt())
}

/// α₀ = E_l/(κ/2 + iΔ); β₀ = g|α₀|²/(ω_m − iγ_m/2) when g is supplied,
/// zero otherwise.
pub fn steady_pump(drive_amp: Complex64, params: &PhysicalParams, g: Option<f64>) -> PumpState {
    let alpha0 = drive_amp / Complex64::new(params.kappa() / 2.0, params.delta());
    let beta0 = match g {
        Some(g) => {
            g * alpha0.norm_sqr() / Complex64::new(params.omega_m(), -params.gamma_m() / 2.0)
        }
        None => Complex64::new(0.0, 0.0),
    };
    PumpState { alpha0, beta0 }
}

/// Static radiation-pressure shift 2|α₀|²g²/ω_m folded into the effective
/// detuning. Reporting helper; Δ is taken as a locked input elsewhere.
pub fn pump_shift(alpha0: Complex64, g: f64, omega_m: f64) -> f64 {
    2.0 * alpha0.norm_sqr() * g * g / omega_m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{khz_to_rad_per_us, mhz_to_rad_per_us};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn fig3_params() -> PhysicalParams {
        PhysicalParams::new(
            mhz_to_rad_per_us(15.0),
            mhz_to_rad_per_us(15.0),
            khz_to_rad_per_us(20.0),
            mhz_to_rad_per_us(94.0),
            None,
            mhz_to_rad_per_us(0.58),
        )
        .unwrap()
    }

    #[test]
    fn transfer_rate_characteristic_time() {
        // G/2π=0.58 MHz, κ/2π=30 MHz, γ_m/2π=20 kHz → 1/Γ = 4.9 µs ± 2%
        let inv = 1.0 / transfer_rate(&fig3_params());
        assert!((inv - 4.9).abs() / 4.9 < 0.02, "1/Γ = {inv}");
    }

    #[test]
    fn transfer_rate_coupling_off() {
        let p = fig3_params().with_big_g(0.0).unwrap();
        assert_eq!(transfer_rate(&p), p.gamma_m() / 2.0);
    }

    #[test]
    fn transfer_rate_hand_checked() {
        // G/2π = 1 MHz: Γ = 2·(2π)²/(2π·30) + 2π·0.02/2, hand arithmetic
        let p = fig3_params().with_big_g(mhz_to_rad_per_us(1.0)).unwrap();
        let expected = 2.0 * (TAU).powi(2) / (TAU * 30.0) + TAU * 0.02 / 2.0;
        let got = transfer_rate(&p);
        assert!((got - expected).abs() / expected < 1e-14);
        assert!((1.0 / got - 2.07).abs() < 0.01);
    }

    #[test]
    fn detunings_examples() {
        let p = fig3_params();
        let d = detunings(&p, p.omega_m());
        assert_eq!(d.x, 0.0);
        assert_eq!(d.y, 0.0);

        let d = detunings(&p, 0.0);
        assert_eq!(d.x, p.delta());
        assert_eq!(d.y, p.omega_m());

        // δ/2π = 94.1 MHz → x/2π = y/2π = −100 kHz
        let d = detunings(&p, mhz_to_rad_per_us(94.1));
        assert!((d.x - khz_to_rad_per_us(-100.0)).abs() < 1e-9);
        assert!((d.y - khz_to_rad_per_us(-100.0)).abs() < 1e-9);
    }

    #[test]
    fn power_to_amplitude_examples() {
        let kappa = TAU * 30e6;
        let omega = TAU * 2.99792458e8 / 780e-9;
        assert_eq!(power_to_amplitude(0.0, omega, kappa).unwrap(), 0.0);

        let e1 = power_to_amplitude(1e-3, omega, kappa).unwrap();
        let e4 = power_to_amplitude(4e-3, omega, kappa).unwrap();
        assert!((e4 - 2.0 * e1).abs() / e4 < 1e-12);

        // Fig. 3 drive: P = 3.4 mW, λ = 780 nm; brute-force arithmetic
        let e = power_to_amplitude(3.4e-3, omega, kappa).unwrap();
        let expected = (kappa * 3.4e-3 / (HBAR * omega)).sqrt();
        assert!((e - expected).abs() / expected < 1e-14);
        assert!(e > 1e12 && e < 2e12, "magnitude check, got {e}");

        assert!(power_to_amplitude(-1.0, omega, kappa).is_err());
    }

    #[test]
    fn single_photon_coupling_scalings() {
        let omega_c = TAU * 2.99792458e8 / 780e-9;
        let omega_m = TAU * 94e6;
        let (l, m) = (33e-6, 1e-11);
        let g = single_photon_coupling(omega_c, l, m, omega_m).unwrap();
        let g_2l = single_photon_coupling(omega_c, 2.0 * l, m, omega_m).unwrap();
        let g_4m = single_photon_coupling(omega_c, l, 4.0 * m, omega_m).unwrap();
        assert!((g_2l - g / 2.0).abs() / g < 1e-14);
        assert!((g_4m - g / 2.0).abs() / g < 1e-14);

        // independent evaluation of the closed formula
        let expected = omega_c / l * (HBAR / (m * omega_m)).sqrt();
        assert!((g - expected).abs() / expected < 1e-14);

        assert!(single_photon_coupling(-1.0, l, m, omega_m).is_err());
    }

    #[test]
    fn steady_pump_examples() {
        let p = fig3_params();
        let z = steady_pump(Complex64::new(0.0, 0.0), &p, Some(1.0));
        assert_eq!(z.alpha0, Complex64::new(0.0, 0.0));
        assert_eq!(z.beta0, Complex64::new(0.0, 0.0));

        let on_res = p.with_delta(0.0).unwrap();
        let s = steady_pump(Complex64::new(1.0, 0.0), &on_res, None);
        assert!((s.alpha0.re - 2.0 / on_res.kappa()).abs() < 1e-15);
        assert!(s.alpha0.im.abs() < 1e-15);

        let s = steady_pump(Complex64::new(1.0, 0.0), &p, None);
        let expected = 1.0 / ((p.kappa() / 2.0).powi(2) + p.delta().powi(2)).sqrt();
        assert!((s.alpha0.norm() - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn construction_enforces_kappa_sum() {
        let p = fig3_params();
        assert_eq!(p.kappa(), p.kappa_e() + p.kappa_i());
        assert!(p.ramsey_valid());
        assert!(!fig3_params().with_gamma_m(p.kappa() / 50.0).unwrap().ramsey_valid());
        assert!(PhysicalParams::new(-1.0, 0.5, 0.1, 1.0, None, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn transfer_rate_monotone(g1 in 0.0f64..10.0, g2 in 0.0f64..10.0,
                                  gm1 in 1e-4f64..1.0, gm2 in 1e-4f64..1.0) {
            let base = fig3_params();
            let (glo, ghi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let a = transfer_rate(&base.with_big_g(glo).unwrap());
            let b = transfer_rate(&base.with_big_g(ghi).unwrap());
            prop_assert!(a <= b);
            let (mlo, mhi) = if gm1 < gm2 { (gm1, gm2) } else { (gm2, gm1) };
            let a = transfer_rate(&base.with_gamma_m(mlo).unwrap());
            let b = transfer_rate(&base.with_gamma_m(mhi).unwrap());
            prop_assert!(a <= b);
        }

        #[test]
        fn amplitude_scaling(p in 1e-6f64..1.0, c in 1e-3f64..1e3) {
            let kappa = TAU * 30e6;
            let omega = TAU * 3.8e14;
            let e = power_to_amplitude(p, omega, kappa).unwrap();
            let e_scaled = power_to_amplitude(c * c * p, omega, kappa).unwrap();
            prop_assert!((e_scaled - c * e).abs() / e_scaled < 1e-12);
        }
    }

    #[test]
    fn detunings_difference_identity_grid() {
        // x(δ) − y(δ) = Δ − ω_m across a 1000-point δ grid
        let p = fig3_params().with_delta(mhz_to_rad_per_us(93.7)).unwrap();
        let expected = p.delta() - p.omega_m();
        for i in 0..1000 {
            let delta_pl = mhz_to_rad_per_us(90.0 + 0.008 * i as f64);
            let d = detunings(&p, delta_pl);
            assert!((d.x - d.y - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }
}

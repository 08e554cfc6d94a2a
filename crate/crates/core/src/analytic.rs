//! Closed-form results: the two-path Ramsey amplitudes, the steady-state
//! transparency spectrum, and the classic atomic Ramsey reference formulas.
//!
//! These are approximations used for physics insight and as cross-checks on
//! the exact propagator; the analysis pipeline itself always goes through
//! [`crate::propagator`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{transfer_rate, Detunings, PhysicalParams};
use crate::schedule::PulseSchedule;

type C = Complex64;

/// Two-path interference amplitudes after the second pulse, normalized to
/// the probe amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyAmplitudes {
    /// κ_e·β_R/E_p: τ₁-path term weighted by e^{−iφ−µ} plus τ₂-path term.
    pub beta_r: C,
    /// κ_e·α_R/E_p = 1 + (2G/κ_e)·beta_r.
    pub alpha_r: C,
    /// Accumulated phase φ = y(τ₂+T); sets the fringe period.
    pub phi: f64,
    /// Decay exponent µ = γ_m T/2 + Γτ₂; sets the visibility loss.
    pub mu: f64,
}

fn excitation_term(y: f64, gamma: f64, tau: f64) -> C {
    let pole = C::new(gamma, y);
    ((-pole * tau).exp() - 1.0) / pole
}

/// Two-path Ramsey amplitudes at mechanical detuning `y`.
///
/// The optical line keeps the literal prefactor 2G on β_R; the
/// steady-state limit would require G instead, a factor-2 discrepancy that
/// the tests document rather than correct (see
/// `fringe_weight_factor_two_vs_steady_state`). Quantitative comparisons
/// against the propagator are therefore restricted to extrema positions.
pub fn ramsey_amplitudes(
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    y: f64,
) -> RamseyAmplitudes {
    let gamma = transfer_rate(params);
    let phi = y * (schedule.tau2 + schedule.gap);
    let mu = params.gamma_m() * schedule.gap / 2.0 + gamma * schedule.tau2;
    let first = excitation_term(y, gamma, schedule.tau1) * (C::new(-mu, -phi)).exp();
    let second = excitation_term(y, gamma, schedule.tau2);
    let beta_r = params.big_g() * (first + second);
    let alpha_r = 1.0 + 2.0 * params.big_g() / params.kappa_e() * beta_r;
    RamseyAmplitudes { beta_r, alpha_r, phi, mu }
}

/// Long-pulse (steady-state) transparency amplitude
/// κ_e·α_ss/E_p = κ_e / [(ix + κ/2) + G²/(iy + γ_m/2)].
pub fn steady_omit(params: &PhysicalParams, det: &Detunings) -> C {
    let g2 = params.big_g() * params.big_g();
    let denom = C::new(params.kappa() / 2.0, det.x)
        + g2 / C::new(params.gamma_m() / 2.0, det.y);
    params.kappa_e() / denom
}

impl RamseyAmplitudes {
    /// Optical amplitude with the fringe term weighted so the Γτ₂ ≫ 1,
    /// µ ≫ 1 limit reproduces the steady-state spectrum exactly:
    /// 1 + (G/κ_e)·beta_r. The literal line carries 2G instead and
    /// overweights the fringe term by a factor 2; this variant is the one
    /// that tracks the propagated spectrum's extrema positions.
    pub fn alpha_consistent(&self, params: &PhysicalParams) -> C {
        1.0 + params.big_g() / params.kappa_e() * self.beta_r
    }
}

fn sinc(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.sin() / z
    }
}

/// Classic atomic Ramsey reference: single-pulse excitation probability
/// p_s = g²τ² sinc²(Δτ/2) and two-pulse p_R = p_s(cos ΔT + 1). Weak-pulse
/// regime assumed; no clipping is applied.
pub fn classic_ramsey(rabi_g: f64, tau: f64, delta: f64, gap: f64) -> (f64, f64) {
    let p_s = rabi_g * rabi_g * tau * tau * sinc(delta * tau / 2.0).powi(2);
    let p_r = p_s * ((delta * gap).cos() + 1.0);
    (p_s, p_r)
}

/// Advisory regime flags for the fringe conditions τ₁Γ ≳ 1, τ₂Γ < 1,
/// Tγ_m ≪ 1 (thresholds 0.5, 1, 0.1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FringeConditions {
    /// τ₁Γ ≥ 0.5 — first pulse long enough to excite phonons.
    pub tau1_sufficient: bool,
    /// τ₂Γ < 1 — second pulse short enough to avoid signal decay.
    pub tau2_short: bool,
    /// Tγ_m < 0.1 — mechanical coherence survives the gap.
    pub gap_coherent: bool,
}

/// Naive fringe period 2π/(T+τ₂), decay exponent µ, and the condition
/// flags. The observed period is lower than the naive value whenever Γ > 0.
pub fn fringe_scales(params: &PhysicalParams, schedule: &PulseSchedule) -> (f64, f64, FringeConditions) {
    let gamma = transfer_rate(params);
    let naive_period = std::f64::consts::TAU / (schedule.gap + schedule.tau2);
    let mu = params.gamma_m() * schedule.gap / 2.0 + gamma * schedule.tau2;
    let conditions = FringeConditions {
        tau1_sufficient: schedule.tau1 * gamma >= 0.5,
        tau2_short: schedule.tau2 * gamma < 1.0,
        gap_coherent: schedule.gap * params.gamma_m() < 0.1,
    };
    (naive_period, mu, conditions)
}

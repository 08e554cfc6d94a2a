//! Exact piecewise-constant propagation of the linearized sideband
//! amplitudes, plus an independent fixed-step RK4 oracle.
//!
//! Within one segment the amplitudes obey the constant-coefficient affine
//! system v̇ = A v + b with
//!
//! ```text
//! A = [ −(ix + κ/2)   −G ]        b = (E_p, 0)
//!     [      G   −(iy + γ_m/2) ]
//! ```
//!
//! whose exact solution is v(t) = e^{At}(v₀ + A⁻¹b) − A⁻¹b. The 2×2 matrix
//! exponential is evaluated in closed form: with m = tr(A)/2 and
//! N = A − mI (traceless, N² = d²I),
//! e^{At} = e^{mt}[cosh(dt)·I + t·sinch(dt)·N]. The sinch(z) = sinh(z)/z
//! factor switches to its series below |z| = 1e-4, which covers the
//! degenerate-eigenvalue limit d → 0 without a conditioning failure.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{Detunings, PhysicalParams};
use crate::schedule::{compile, PulseSchedule, ScheduleError, Segment};

type C = Complex64;

#[derive(Debug, Error)]
pub enum PropagatorError {
    #[error("oracle step dt must be > 0, got {0}")]
    NonPositiveDt(f64),
    #[error("gate [{start}, {end}] µs outside trace span [{t0}, {t1}] µs")]
    GateOutsideTrace { start: f64, end: f64, t0: f64, t1: f64 },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Complex sideband amplitudes at a time instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    pub alpha: C,
    pub beta: C,
    pub t: f64,
}

impl SystemState {
    pub fn zero() -> Self {
        Self { alpha: C::new(0.0, 0.0), beta: C::new(0.0, 0.0), t: 0.0 }
    }
}

/// Dense output of a full schedule run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub samples: Vec<SystemState>,
    pub sample_dt: f64,
}

#[derive(Debug, Clone, Copy)]
struct Mat2 {
    a11: C,
    a12: C,
    a21: C,
    a22: C,
}

impl Mat2 {
    fn apply(&self, v: (C, C)) -> (C, C) {
        (self.a11 * v.0 + self.a12 * v.1, self.a21 * v.0 + self.a22 * v.1)
    }
}

fn system_matrix(seg: &Segment, det: &Detunings, params: &PhysicalParams) -> (Mat2, C) {
    let g = if seg.g_on { params.big_g() } else { 0.0 };
    let a = Mat2 {
        a11: C::new(-params.kappa() / 2.0, -det.x),
        a12: C::new(-g, 0.0),
        a21: C::new(g, 0.0),
        a22: C::new(-params.gamma_m() / 2.0, -det.y),
    };
    (a, seg.probe)
}

/// sinh(z)/z, series below |z| = 1e-4.
fn sinch(z: C) -> C {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        C::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// e^{At} in closed form.
fn expm(a: &Mat2, t: f64) -> Mat2 {
    let m = (a.a11 + a.a22) / 2.0;
    let n11 = a.a11 - m;
    // N traceless: N² = (n11² + a12·a21)·I
    let d = (n11 * n11 + a.a12 * a.a21).sqrt();
    let z = d * t;
    let scale = m.scale(t).exp();
    let ch = z.cosh() * scale;
    let sh_over_d = sinch(z) * t * scale;
    Mat2 {
        a11: ch + sh_over_d * n11,
        a12: sh_over_d * a.a12,
        a21: sh_over_d * a.a21,
        a22: ch - sh_over_d * n11,
    }
}

/// A⁻¹b for b = (E_p, 0). A is invertible: both eigenvalues have strictly
/// negative real part for κ, γ_m > 0.
fn particular(a: &Mat2, b: C) -> (C, C) {
    let det = a.a11 * a.a22 - a.a12 * a.a21;
    (a.a22 * b / det, -a.a21 * b / det)
}

/// Exact solution over one segment: v(τ) = e^{Aτ}(v₀ + A⁻¹b) − A⁻¹b.
pub fn propagate_segment(
    state: &SystemState,
    seg: &Segment,
    det: &Detunings,
    params: &PhysicalParams,
) -> SystemState {
    if seg.duration == 0.0 {
        return *state;
    }
    let (a, b) = system_matrix(seg, det, params);
    let e = expm(&a, seg.duration);
    let v = (state.alpha, state.beta);
    let (alpha, beta) = if b == C::new(0.0, 0.0) {
        e.apply(v)
    } else {
        let q = particular(&a, b);
        let w = e.apply((v.0 + q.0, v.1 + q.1));
        (w.0 - q.0, w.1 - q.1)
    };
    SystemState { alpha, beta, t: state.t + seg.duration }
}

/// Classical fixed-step RK4 over the same system. Verification only; the
/// final partial step is shortened to land exactly on the boundary.
pub fn rk_oracle(
    state: &SystemState,
    seg: &Segment,
    det: &Detunings,
    params: &PhysicalParams,
    dt: f64,
) -> Result<SystemState, PropagatorError> {
    if !(dt > 0.0) {
        return Err(PropagatorError::NonPositiveDt(dt));
    }
    let (a, b) = system_matrix(seg, det, params);
    let f = |v: (C, C)| {
        let av = a.apply(v);
        (av.0 + b, av.1)
    };
    let mut v = (state.alpha, state.beta);
    let mut remaining = seg.duration;
    while remaining > 0.0 {
        let h = dt.min(remaining);
        let k1 = f(v);
        let k2 = f((v.0 + k1.0 * (h / 2.0), v.1 + k1.1 * (h / 2.0)));
        let k3 = f((v.0 + k2.0 * (h / 2.0), v.1 + k2.1 * (h / 2.0)));
        let k4 = f((v.0 + k3.0 * h, v.1 + k3.1 * h));
        v = (
            v.0 + (k1.0 + (k2.0 + k3.0) * 2.0 + k4.0) * (h / 6.0),
            v.1 + (k1.1 + (k2.1 + k3.1) * 2.0 + k4.1) * (h / 6.0),
        );
        remaining -= h;
    }
    Ok(SystemState { alpha: v.0, beta: v.1, t: state.t + seg.duration })
}

/// Runs the compiled schedule from α = β = 0 at t = 0, recording dense
/// samples. Each segment is sampled on a uniform grid of step ≈ `sample_dt`
/// chosen so that segment boundaries coincide with sample points; samples
/// advance by repeated application of the exact one-step propagator.
pub fn run_schedule(
    schedule: &PulseSchedule,
    det: &Detunings,
    params: &PhysicalParams,
    sample_dt: f64,
) -> Result<Trace, PropagatorError> {
    if !(sample_dt > 0.0) {
        return Err(PropagatorError::NonPositiveDt(sample_dt));
    }
    let segments = compile(schedule)?;
    let total: f64 = segments.iter().map(|s| s.duration).sum();
    let mut samples = Vec::with_capacity((total / sample_dt) as usize + segments.len() + 2);
    let mut v = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    let mut seg_start = 0.0_f64;
    samples.push(SystemState { alpha: v.0, beta: v.1, t: 0.0 });
    for seg in &segments {
        let n = ((seg.duration / sample_dt).round() as usize).max(1);
        let h = seg.duration / n as f64;
        let (a, b) = system_matrix(seg, det, params);
        let e = expm(&a, h);
        let q = if b == C::new(0.0, 0.0) { None } else { Some(particular(&a, b)) };
        for k in 1..=n {
            v = match q {
                Some(q) => {
                    let w = e.apply((v.0 + q.0, v.1 + q.1));
                    (w.0 - q.0, w.1 - q.1)
                }
                None => e.apply(v),
            };
            samples.push(SystemState { alpha: v.0, beta: v.1, t: seg_start + h * k as f64 });
        }
        seg_start += seg.duration;
    }
    Ok(Trace { samples, sample_dt })
}

/// State at the end of the schedule horizon, from α = β = 0 at t = 0.
/// Chains the exact per-segment propagator without dense sampling.
pub fn final_state(
    schedule: &PulseSchedule,
    det: &Detunings,
    params: &PhysicalParams,
) -> Result<SystemState, PropagatorError> {
    let mut state = SystemState::zero();
    for seg in compile(schedule)? {
        state = propagate_segment(&state, &seg, det, params);
    }
    Ok(state)
}

/// Mean over the gate window of |κ_e α(t)|²/|E_p|², trapezoidal on the
/// sample grid. Zero probe yields zero.
pub fn gated_intensity(
    trace: &Trace,
    schedule: &PulseSchedule,
    params: &PhysicalParams,
) -> Result<f64, PropagatorError> {
    let (gs, ge) = (schedule.gate_start, schedule.gate_start + schedule.gate_len);
    let (t0, t1) = (
        trace.samples.first().map_or(0.0, |s| s.t),
        trace.samples.last().map_or(0.0, |s| s.t),
    );
    let eps = 1e-9 * t1.abs().max(1.0);
    if gs < t0 - eps || ge > t1 + eps {
        return Err(PropagatorError::GateOutsideTrace { start: gs, end: ge, t0, t1 });
    }
    let ep2 = schedule.probe_amp.norm_sqr();
    if ep2 == 0.0 {
        return Ok(0.0);
    }
    let ke2 = params.kappa_e() * params.kappa_e();
    let gated: Vec<&SystemState> = trace
        .samples
        .iter()
        .filter(|s| s.t >= gs - eps && s.t <= ge + eps)
        .collect();
    // trapezoid over |κ_e α|², then mean over the covered span
    let mut integral = 0.0;
    for pair in gated.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        integral += 0.5 * (b.t - a.t) * ke2 * (a.alpha.norm_sqr() + b.alpha.norm_sqr());
    }
    let span = gated.last().unwrap().t - gated.first().unwrap().t;
    Ok(integral / span / ep2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::detunings;
    use crate::units::{khz_to_rad_per_us, mhz_to_rad_per_us};
    use crate::PhysicalParams;

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

    fn seg(duration: f64, g_on: bool, probe: f64) -> Segment {
        Segment { duration, g_on, probe: C::new(probe, 0.0) }
    }

    #[test]
    fn decoupled_decay_closed_form() {
        let params = fig3_params().with_big_g(0.0).unwrap();
        let det = detunings(&params, mhz_to_rad_per_us(93.9));
        let state = SystemState { alpha: C::new(1.0, 0.0), beta: C::new(0.3, -0.2), t: 0.0 };
        let tau = 0.05;
        let out = propagate_segment(&state, &seg(tau, true, 0.0), &det, &params);
        let expect_a = (C::new(-params.kappa() / 2.0, -det.x) * tau).exp();
        let expect_b = state.beta * (C::new(-params.gamma_m() / 2.0, -det.y) * tau).exp();
        assert!((out.alpha - expect_a).norm() < 1e-12);
        assert!((out.beta - expect_b).norm() < 1e-12);
    }

    #[test]
    fn zero_duration_is_identity() {
        let params = fig3_params();
        let det = detunings(&params, params.omega_m());
        let state = SystemState { alpha: C::new(0.5, 0.1), beta: C::new(-0.2, 0.7), t: 3.0 };
        let out = propagate_segment(&state, &seg(0.0, true, 1.0), &det, &params);
        assert_eq!(out, state);
    }

    #[test]
    fn fig3a_segment_matches_rk_oracle() {
        let params = fig3_params();
        let det = detunings(&params, params.omega_m()); // x = y = 0
        let s = seg(4.0, true, 1.0);
        let start = SystemState::zero();
        let exact = propagate_segment(&start, &s, &det, &params);
        let rk = rk_oracle(&start, &s, &det, &params, 1e-4).unwrap();
        let scale = exact.alpha.norm().max(exact.beta.norm());
        assert!((exact.alpha - rk.alpha).norm() / scale < 1e-8);
        assert!((exact.beta - rk.beta).norm() / scale < 1e-8);
    }

    #[test]
    fn rk_oracle_fourth_order_convergence() {
        let params = fig3_params();
        let det = detunings(&params, params.omega_m() + khz_to_rad_per_us(80.0));
        let s = seg(0.5, true, 1.0);
        let start = SystemState::zero();
        let exact = propagate_segment(&start, &s, &det, &params);
        let err = |dt: f64| {
            let rk = rk_oracle(&start, &s, &det, &params, dt).unwrap();
            (rk.alpha - exact.alpha).norm() + (rk.beta - exact.beta).norm()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "convergence ratio {ratio}");
    }

    #[test]
    fn rk_oracle_trivialities() {
        let params = fig3_params();
        let det = detunings(&params, params.omega_m());
        let z = rk_oracle(&SystemState::zero(), &seg(1.0, false, 0.0), &det, &params, 1e-3)
            .unwrap();
        assert_eq!(z.alpha, C::new(0.0, 0.0));
        assert_eq!(z.beta, C::new(0.0, 0.0));
        assert!(rk_oracle(&SystemState::zero(), &seg(1.0, true, 1.0), &det, &params, 0.0).is_err());
    }

    #[test]
    fn free_evolution_decay_factors() {
        // Fig. 3a at y = 0: over the gap T = 4 µs the mechanical amplitude
        // contracts by e^{−γ_m T/2} while the optical amplitude collapses.
        let params = fig3_params();
        let det = detunings(&params, params.omega_m());
        let sched =
            PulseSchedule::second_pair(4.0, 4.0, 1.0, 1.0, C::new(1.0, 0.0)).unwrap();
        let trace = run_schedule(&sched, &det, &params, 1e-3).unwrap();
        let at = |t: f64| {
            *trace
                .samples
                .iter()
                .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
                .unwrap()
        };
        let end_tau1 = at(4.0);
        let end_gap = at(8.0);
        let expect = (-params.gamma_m() * 4.0 / 2.0).exp();
        let ratio = end_gap.beta.norm() / end_tau1.beta.norm();
        assert!((ratio - expect).abs() < 1e-9, "β ratio {ratio} vs {expect}");
        assert!(end_gap.alpha.norm() < 1e-12 * end_tau1.alpha.norm().max(1.0));
    }

    #[test]
    fn zero_probe_zero_trace() {
        let params = fig3_params();
        let det = detunings(&params, params.omega_m());
        let sched =
            PulseSchedule::second_pair(4.0, 4.0, 1.0, 1.0, C::new(0.0, 0.0)).unwrap();
        let trace = run_schedule(&sched, &det, &params, 1e-2).unwrap();
        assert!(trace.samples.iter().all(|s| s.alpha.norm() == 0.0 && s.beta.norm() == 0.0));
        assert_eq!(gated_intensity(&trace, &sched, &params).unwrap(), 0.0);
    }

    #[test]
    fn probe_linearity() {
        let params = fig3_params();
        let det = detunings(&params, params.omega_m() + khz_to_rad_per_us(50.0));
        let mk = |amp: f64| {
            let s = PulseSchedule::second_pair(4.0, 4.0, 1.0, 1.0, C::new(amp, 0.0)).unwrap();
            run_schedule(&s, &det, &params, 1e-2).unwrap()
        };
        let (t1, t2) = (mk(1.0), mk(2.0));
        for (a, b) in t1.samples.iter().zip(&t2.samples) {
            assert!((b.alpha - a.alpha * 2.0).norm() < 1e-12 * b.alpha.norm().max(1e-6));
            assert!((b.beta - a.beta * 2.0).norm() < 1e-12 * b.beta.norm().max(1e-6));
        }
    }

    #[test]
    fn bare_cavity_resonance_unity_intensity() {
        // G = 0, x = 0, critical coupling: steady α = E_p/(κ/2), intensity 1
        let params = fig3_params().with_big_g(0.0).unwrap();
        let det = detunings(&params, params.omega_m());
        let sched =
            PulseSchedule::second_pair(4.0, 0.0, 1.0, 1.0, C::new(1.0, 0.0)).unwrap();
        let trace = run_schedule(&sched, &det, &params, 1e-3).unwrap();
        let i = gated_intensity(&trace, &sched, &params).unwrap();
        assert!((i - 1.0).abs() < 1e-9, "intensity {i}");
    }

    #[test]
    fn gate_outside_trace_errors() {
        let params = fig3_params();
        let det = detunings(&params, params.omega_m());
        let sched =
            PulseSchedule::second_pair(4.0, 4.0, 1.0, 1.0, C::new(1.0, 0.0)).unwrap();
        let trace = run_schedule(&sched, &det, &params, 1e-2).unwrap();
        let mut bad = sched;
        bad.gate_start = 9.5; // trailing edge 10.5 > horizon 9
        assert!(matches!(
            gated_intensity(&trace, &bad, &params),
            Err(PropagatorError::GateOutsideTrace { .. })
        ));
    }
}

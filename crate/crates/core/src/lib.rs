//! Simulation and analysis toolkit for pulsed-optomechanics Ramsey
//! interferometry.
//!
//! The linearized sideband amplitudes (α, β) of a driven optomechanical
//! cavity evolve under a piecewise-constant affine system set by the pulse
//! schedule. This crate propagates that system exactly per segment, computes
//! gated heterodyne spectra over a probe–drive detuning grid, extracts
//! Ramsey fringe observables (period, visibility, central-dip position),
//! and fits model parameters to observed spectra.
//!
//! Internal unit system: angular frequencies and rates in rad/µs, times in
//! µs. In this system the relevant magnitudes are O(0.1)–O(200), which keeps
//! the per-segment matrix exponential well conditioned. Configuration-level
//! Hz/kHz/MHz values convert at the boundary via [`units`].

pub mod analysis;
pub mod analytic;
pub mod model;
pub mod propagator;
pub mod schedule;
pub mod units;

pub use analysis::{
    extract, fit, scan, sweep, AnalysisError, FitOptions, FitResult, FreeParam, FringeReport,
    GridSpec, ScanAxis, Spectrum, SpectrumMeta,
};
pub use analytic::{classic_ramsey, fringe_scales, ramsey_amplitudes, steady_omit, RamseyAmplitudes};
pub use model::{Detunings, ModelError, PhysicalParams, PumpState};
pub use propagator::{final_state, gated_intensity, propagate_segment, rk_oracle, run_schedule, SystemState, Trace};
pub use schedule::{PulseSchedule, ScheduleError, Segment};

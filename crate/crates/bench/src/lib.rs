//! Shared fixtures for the criterion benches.

use num_complex::Complex64;
use omri_core::analysis::GridSpec;
use omri_core::model::PhysicalParams;
use omri_core::schedule::PulseSchedule;
use omri_core::units::{khz_to_rad_per_us, mhz_to_rad_per_us};

pub fn bench_params() -> PhysicalParams {
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

pub fn bench_schedule() -> PulseSchedule {
    PulseSchedule::second_pair(4.0, 4.0, 1.0, 1.0, Complex64::new(1.0, 0.0)).unwrap()
}

pub fn bench_grid(points: usize) -> GridSpec {
    GridSpec { points, ..GridSpec::default_for(&bench_params()) }
}

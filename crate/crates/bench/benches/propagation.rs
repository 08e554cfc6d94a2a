use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use omri_bench::{bench_grid, bench_params, bench_schedule};
use omri_core::analysis::sweep;
use omri_core::model::detunings;
use omri_core::propagator::{propagate_segment, run_schedule, SystemState};
use omri_core::schedule::Segment;

fn propagate_single_segment(c: &mut Criterion) {
    let params = bench_params();
    let det = detunings(&params, params.omega_m());
    let seg = Segment { duration: 4.0, g_on: true, probe: Complex64::new(1.0, 0.0) };
    let state = SystemState::zero();
    c.bench_function("propagate_segment 4us", |b| {
        b.iter(|| propagate_segment(black_box(&state), black_box(&seg), &det, &params))
    });
}

fn run_full_schedule(c: &mut Criterion) {
    let params = bench_params();
    let schedule = bench_schedule();
    let det = detunings(&params, params.omega_m());
    c.bench_function("run_schedule 9us @ 1ns", |b| {
        b.iter(|| run_schedule(black_box(&schedule), &det, &params, 1e-3).unwrap())
    });
}

fn sweep_spectrum(c: &mut Criterion) {
    let params = bench_params();
    let schedule = bench_schedule();
    let grid = bench_grid(201);
    c.bench_function("sweep 201 pts @ 10ns", |b| {
        b.iter(|| sweep(&params, &schedule, black_box(&grid), 1e-2).unwrap())
    });
}

criterion_group!(benches, propagate_single_segment, run_full_schedule, sweep_spectrum);
criterion_main!(benches);

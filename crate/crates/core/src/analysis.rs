//! Spectrum sweeps over the probe–drive detuning grid, fringe-observable
//! extraction, parameter scans, and least-squares model fitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{detunings, PhysicalParams};
use crate::propagator::{gated_intensity, run_schedule, PropagatorError};
use crate::schedule::{PulseSchedule, ScheduleError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid detuning grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error("invalid model parameters during {context}: {source}")]
    Params {
        context: &'static str,
        source: crate::model::ModelError,
    },
}

/// Uniform detuning grid in δ = ω_p − ω_l, rad/µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: f64,
    pub span: f64,
    pub points: usize,
}

impl GridSpec {
    /// Default analysis grid: ±2π·0.6 MHz around y = 0 (δ = ω_m),
    /// 2001 points — >100 points per period for the finest paper fringe.
    pub fn default_for(params: &PhysicalParams) -> Self {
        Self {
            center: params.omega_m(),
            span: crate::units::mhz_to_rad_per_us(1.2),
            points: 2001,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let step = self.span / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.center - self.span / 2.0 + step * i as f64)
            .collect()
    }

    pub fn step(&self) -> f64 {
        self.span / (self.points - 1) as f64
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        if self.points < 2 {
            return Err(AnalysisError::Grid(format!("need >= 2 points, got {}", self.points)));
        }
        if !(self.span > 0.0) {
            return Err(AnalysisError::Grid(format!("span must be > 0, got {}", self.span)));
        }
        Ok(())
    }
}

/// Parameter snapshot carried with every spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub params: PhysicalParams,
    pub schedule: PulseSchedule,
    pub grid: GridSpec,
    pub sample_dt: f64,
}

/// Gated normalized intensity vs probe–drive detuning, ascending in δ.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// (δ = ω_p − ω_l in rad/µs, intensity).
    pub points: Vec<(f64, f64)>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    /// Detuning axis mapped to y = ω_m − δ, ascending in y, paired with
    /// intensity. The central dip sits at y = 0 in this convention.
    pub fn y_axis(&self) -> Vec<(f64, f64)> {
        let om = self.meta.params.omega_m();
        let mut pts: Vec<(f64, f64)> = self.points.iter().map(|&(d, i)| (om - d, i)).collect();
        pts.reverse();
        pts
    }
}

/// Intensities at an explicit δ list; shared by `sweep`, the fit
/// objective, and fitted-model export on non-uniform observed grids.
/// Parallel over grid points, output order-identical to sequential
/// evaluation.
pub fn intensities_at(
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    deltas: &[f64],
    sample_dt: f64,
) -> Result<Vec<f64>, AnalysisError> {
    deltas
        .par_iter()
        .map(|&delta_pl| {
            let det = detunings(params, delta_pl);
            let trace = run_schedule(schedule, &det, params, sample_dt)?;
            Ok(gated_intensity(&trace, schedule, params)?)
        })
        .collect()
}

/// Full spectrum over the grid: one run_schedule + gated_intensity per δ.
pub fn sweep(
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    grid: &GridSpec,
    sample_dt: f64,
) -> Result<Spectrum, AnalysisError> {
    grid.validate()?;
    schedule.validate()?;
    let deltas = grid.values();
    let intensities = intensities_at(params, schedule, &deltas, sample_dt)?;
    Ok(Spectrum {
        points: deltas.into_iter().zip(intensities).collect(),
        meta: SpectrumMeta { params: *params, schedule: *schedule, grid: *grid, sample_dt },
    })
}

/// Extracted fringe observables. Positions are in the y = ω_m − δ
/// convention, rad/µs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FringeReport {
    /// Detuning y of the global minimum, sub-grid refined.
    pub central_dip: f64,
    /// Local minima positions inside the analysis band, ascending.
    pub minima: Vec<f64>,
    /// Mean adjacent-minima spacing; absent with fewer than 2 minima.
    pub period: Option<f64>,
    /// Side-fringe contrast: the largest (I_max − I_min)/(I_max + I_min)
    /// over adjacent extremum pairs in the band, the central dip itself
    /// excluded so the OMIT envelope does not count as a fringe. Zero when
    /// the spectrum carries no side fringes (e.g. the steady dip).
    pub visibility: f64,
}

/// A parabolically refined extremum: (position, value).
type Extremum = (f64, f64);

/// Strict 3-point local minima and maxima with parabolic sub-grid
/// refinement. `xs` must be uniformly spaced ascending.
pub fn refined_extrema(pts: &[(f64, f64)]) -> (Vec<Extremum>, Vec<Extremum>) {
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for w in pts.windows(3) {
        let ((x0, y0), (x1, y1), (x2, y2)) = (w[0], w[1], w[2]);
        let is_min = y1 < y0 && y1 < y2;
        let is_max = y1 > y0 && y1 > y2;
        if !is_min && !is_max {
            continue;
        }
        let denom = y0 - 2.0 * y1 + y2;
        let (pos, val) = if denom == 0.0 {
            (x1, y1)
        } else {
            let off = 0.5 * (y0 - y2) / denom;
            let h = (x2 - x0) / 2.0;
            (x1 + off * h, y1 - 0.25 * (y0 - y2) * off)
        };
        if is_min {
            minima.push((pos, val));
        } else {
            maxima.push((pos, val));
        }
    }
    (minima, maxima)
}

/// Extracts fringe observables from a spectrum. `band` is the full width in
/// rad/µs of the analysis window centered on the global minimum. Fewer than
/// two minima yields a "no fringes" report with `period` absent.
pub fn extract(spectrum: &Spectrum, band: f64) -> FringeReport {
    let pts = spectrum.y_axis();
    let (all_minima, all_maxima) = refined_extrema(&pts);

    // global minimum, refined when interior
    let (gi, &(gy, gv)) = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .unwrap();
    let (central_dip, _) = if gi > 0 && gi + 1 < pts.len() {
        all_minima
            .iter()
            .min_by(|a, b| {
                (a.0 - gy).abs().partial_cmp(&(b.0 - gy).abs()).unwrap()
            })
            .copied()
            .unwrap_or((gy, gv))
    } else {
        (gy, gv)
    };

    let in_band = |p: f64| (p - central_dip).abs() <= band / 2.0;
    let minima: Vec<Extremum> = all_minima.iter().copied().filter(|&(p, _)| in_band(p)).collect();

    let period = if minima.len() >= 2 {
        let span = minima.last().unwrap().0 - minima.first().unwrap().0;
        Some(span / (minima.len() - 1) as f64)
    } else {
        None
    };

    // visibility: strongest adjacent min/max contrast among the side
    // fringes; a smooth dip with no side extrema scores zero
    let mut side: Vec<(f64, f64, bool)> = minima
        .iter()
        .filter(|&&(p, _)| p != central_dip)
        .map(|&(p, v)| (p, v, false))
        .chain(
            all_maxima
                .iter()
                .filter(|&&(p, _)| in_band(p))
                .map(|&(p, v)| (p, v, true)),
        )
        .collect();
    side.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let visibility = side
        .windows(2)
        .filter(|w| w[0].2 != w[1].2)
        .map(|w| {
            let (lo, hi) = (w[0].1.min(w[1].1), w[0].1.max(w[1].1));
            ((hi - lo) / (hi + lo)).clamp(0.0, 1.0)
        })
        .fold(0.0f64, f64::max);

    FringeReport {
        central_dip,
        minima: minima.iter().map(|&(p, _)| p).collect(),
        period,
        visibility,
    }
}

/// Scan axis for the parameter studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    /// Second-pulse width τ₂, µs.
    Tau2,
    /// Free-evolution time T, µs.
    Gap,
    /// Mechanical damping γ_m, rad/µs.
    GammaM,
}

/// Sweeps a spectrum and extracts fringes for each value along the axis.
pub fn scan(
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    axis: ScanAxis,
    values: &[f64],
    grid: &GridSpec,
    band: f64,
    sample_dt: f64,
) -> Result<Vec<(f64, Spectrum, FringeReport)>, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::Grid("scan values must be nonempty".into()));
    }
    values
        .iter()
        .map(|&v| {
            let (p, s) = match axis {
                ScanAxis::Tau2 => (
                    *params,
                    PulseSchedule::second_pair(
                        schedule.tau1,
                        schedule.gap,
                        v,
                        schedule.gate_len,
                        schedule.probe_amp,
                    )?,
                ),
                ScanAxis::Gap => (
                    *params,
                    PulseSchedule::second_pair(
                        schedule.tau1,
                        v,
                        schedule.tau2,
                        schedule.gate_len,
                        schedule.probe_amp,
                    )?,
                ),
                ScanAxis::GammaM => (
                    params
                        .with_gamma_m(v)
                        .map_err(|e| AnalysisError::Params { context: "gamma_m scan", source: e })?,
                    *schedule,
                ),
            };
            let spectrum = sweep(&p, &s, grid, sample_dt)?;
            let report = extract(&spectrum, band);
            Ok((v, spectrum, report))
        })
        .collect()
}

/// Model parameters exposed to the fitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParam {
    /// Driving-enhanced coupling G (log-parameterized).
    BigG,
    /// Total cavity decay κ, rescaled preserving κ_e/κ_i (log).
    Kappa,
    /// Mechanical damping γ_m (log).
    GammaM,
    /// Additive offset on the effective detuning Δ (linear).
    DeltaOffset,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iters: usize,
    pub seed: u64,
    pub sample_dt: f64,
    /// Initial simplex step in log-space (or rad/µs for DeltaOffset).
    pub simplex_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iters: 2000, seed: 0, sample_dt: 1e-3, simplex_step: 0.1 }
    }
}

/// Fitted parameters with residual diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub params_hat: PhysicalParams,
    /// Root-mean-square normalized intensity residual.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn apply_free(
    base: &PhysicalParams,
    free: &[FreeParam],
    u: &[f64],
) -> Result<PhysicalParams, AnalysisError> {
    let mut p = *base;
    let wrap = |e| AnalysisError::Params { context: "fit parameter update", source: e };
    for (f, &ui) in free.iter().zip(u) {
        p = match f {
            FreeParam::BigG => p.with_big_g(ui.exp()).map_err(wrap)?,
            FreeParam::Kappa => p.with_kappa_scaled(ui.exp() / p.kappa()).map_err(wrap)?,
            FreeParam::GammaM => p.with_gamma_m(ui.exp()).map_err(wrap)?,
            FreeParam::DeltaOffset => p.with_delta(base.delta() + ui).map_err(wrap)?,
        };
    }
    Ok(p)
}

fn encode_free(base: &PhysicalParams, free: &[FreeParam]) -> Vec<f64> {
    free.iter()
        .map(|f| match f {
            FreeParam::BigG => base.big_g().ln(),
            FreeParam::Kappa => base.kappa().ln(),
            FreeParam::GammaM => base.gamma_m().ln(),
            FreeParam::DeltaOffset => 0.0,
        })
        .collect()
}

/// Derivative-free simplex descent on the RMS intensity residual between
/// the observed spectrum and model sweeps on the observed grid. Rates are
/// log-parameterized so positivity needs no constraint machinery.
/// Deterministic for a given seed (initial simplex jitter only).
pub fn fit(
    observed: &Spectrum,
    initial: &PhysicalParams,
    free: &[FreeParam],
    options: &FitOptions,
) -> Result<FitResult, AnalysisError> {
    if observed.points.len() < 2 {
        return Err(AnalysisError::Grid("observed spectrum needs >= 2 points".into()));
    }
    if free.is_empty() {
        return Err(AnalysisError::Grid("free parameter subset must be nonempty".into()));
    }
    let deltas: Vec<f64> = observed.points.iter().map(|&(d, _)| d).collect();
    if !deltas.windows(2).all(|w| w[1] > w[0]) {
        return Err(AnalysisError::Grid("observed grid must be strictly increasing".into()));
    }
    let target: Vec<f64> = observed.points.iter().map(|&(_, i)| i).collect();
    let schedule = observed.meta.schedule;

    let objective = |u: &[f64]| -> Result<f64, AnalysisError> {
        let p = apply_free(initial, free, u)?;
        let model = intensities_at(&p, &schedule, &deltas, options.sample_dt)?;
        let sse: f64 = model
            .iter()
            .zip(&target)
            .map(|(m, t)| (m - t) * (m - t))
            .sum();
        Ok((sse / target.len() as f64).sqrt())
    };

    // initial simplex: start point plus one jittered step per dimension
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let n = free.len();
    let x0 = encode_free(initial, free);
    let mut simplex: Vec<Vec<f64>> = vec![x0.clone()];
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += options.simplex_step * (1.0 + rng.gen_range(-0.05..0.05));
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| objective(x)).collect::<Result<_, _>>()?;

    let mut iterations = 0;
    let mut converged = false;
    let mut best_history = f64::INFINITY;
    let mut stall = 0;
    while iterations < options.max_iters {
        iterations += 1;
        // order ascending by objective
        let mut idx: Vec<usize> = (0..simplex.len()).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();

        // convergence: simplex diameter or residual stall
        let diameter = simplex
            .iter()
            .flat_map(|a| {
                simplex.iter().map(move |b| {
                    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
                })
            })
            .fold(0.0f64, f64::max);
        if diameter < 1e-9 {
            converged = true;
            break;
        }
        if best_history - values[0] < 1e-14 {
            stall += 1;
            if stall >= 50 {
                converged = true;
                break;
            }
        } else {
            stall = 0;
            best_history = values[0];
        }

        let worst = simplex.len() - 1;
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..worst].iter().map(|x| x[i]).sum::<f64>() / worst as f64)
            .collect();
        let at = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = at(1.0);
        let f_r = objective(&reflected)?;
        if f_r < values[0] {
            let expanded = at(2.0);
            let f_e = objective(&expanded)?;
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
        } else if f_r < values[worst - 1] {
            simplex[worst] = reflected;
            values[worst] = f_r;
        } else {
            let contracted = at(-0.5);
            let f_c = objective(&contracted)?;
            if f_c < values[worst] {
                simplex[worst] = contracted;
                values[worst] = f_c;
            } else {
                // shrink toward the best vertex
                let best = simplex[0].clone();
                for (x, v) in simplex.iter_mut().zip(values.iter_mut()).skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = objective(x)?;
                }
            }
        }
    }

    let best_idx = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok(FitResult {
        params_hat: apply_free(initial, free, &simplex[best_idx])?,
        residual: values[best_idx],
        iterations,
        converged,
    })
}

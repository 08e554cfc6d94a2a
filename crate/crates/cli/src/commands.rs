//! The four commands. Each builds its artifact set in memory; `execute`
//! appends the manifest and commits everything to the output directory.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;

use omri_core::analysis::{extract, fit, intensities_at, sweep, FitOptions, ScanAxis};
use omri_core::model::detunings;
use omri_core::propagator::{gated_intensity, run_schedule};
use omri_core::units::rad_per_us_to_hz;
use omri_core::{FringeReport, Spectrum, SpectrumMeta};

use crate::output::{
    parse_spectrum_csv, spectrum_csv, trace_csv, Artifacts, Manifest, Timing,
    DETUNING_CONVENTION, SCHEMA_VERSION,
};
use crate::plot::{line_plot, Series};
use crate::scenario::Scenario;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Trace,
    Sweep,
    Scan,
    Fit,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Trace => "trace",
            CommandKind::Sweep => "sweep",
            CommandKind::Scan => "scan",
            CommandKind::Fit => "fit",
        }
    }
}

pub struct RunContext {
    pub command: CommandKind,
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub seed: u64,
    pub observed: Option<PathBuf>,
}

/// Runs the command and commits artifacts; returns the written paths.
pub fn execute(ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let started_unix_s = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();

    let mut artifacts = with_pool(ctx.workers, || match ctx.command {
        CommandKind::Trace => cmd_trace(&ctx.scenario),
        CommandKind::Sweep => cmd_sweep(&ctx.scenario),
        CommandKind::Scan => cmd_scan(&ctx.scenario),
        CommandKind::Fit => cmd_fit(&ctx.scenario, ctx.observed.as_deref(), ctx.seed),
    })?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "omri",
        tool_version: env!("CARGO_PKG_VERSION"),
        command: ctx.command.name().to_string(),
        seed: ctx.seed,
        workers: ctx.workers,
        detuning_convention: DETUNING_CONVENTION,
        resolved: resolved_inputs(&ctx.scenario),
        timing: Timing { started_unix_s, wall_time_ms: clock.elapsed().as_millis() as u64 },
    };
    artifacts.add_json("manifest.json", &manifest)?;
    artifacts.commit(&ctx.out_dir)
}

/// Runs `f` inside a rayon pool of the requested size (0 = library default).
/// Results are order-deterministic regardless of worker count.
fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool construction")
        .install(f)
}

fn resolved_inputs(s: &Scenario) -> serde_json::Value {
    json!({
        "units": "angular rates rad/us, times us",
        "params": s.params,
        "schedule": s.schedule,
        "grid": s.grid,
        "sample_dt_us": s.sample_dt,
        "band_rad_per_us": s.band,
        "scan": s.scan.as_ref().map(|sc| json!({
            "axis": match sc.axis {
                ScanAxis::Tau2 => "tau2",
                ScanAxis::Gap => "gap",
                ScanAxis::GammaM => "gamma_m",
            },
            "values_internal": sc.values,
        })),
        "fit": s.fit.as_ref().map(|f| json!({
            "free": f.free,
            "max_iters": f.max_iters,
        })),
    })
}

fn fringe_json(r: &FringeReport) -> serde_json::Value {
    json!({
        "central_dip_hz": rad_per_us_to_hz(r.central_dip),
        "minima_hz": r.minima.iter().map(|&m| rad_per_us_to_hz(m)).collect::<Vec<_>>(),
        "period_hz": r.period.map(rad_per_us_to_hz),
        "visibility": r.visibility,
    })
}

/// Spectrum → (y/2π in Hz, intensity), ascending, central dip at zero.
fn spectrum_rows(s: &Spectrum) -> Vec<(f64, f64)> {
    s.y_axis().into_iter().map(|(y, i)| (rad_per_us_to_hz(y), i)).collect()
}

fn spectrum_plot(rows: &[(f64, f64)], title: &str) -> String {
    let khz: Vec<(f64, f64)> = rows.iter().map(|&(hz, i)| (hz / 1e3, i)).collect();
    line_plot(
        title,
        "detuning (kHz)",
        "normalized intensity",
        &[Series { label: "", points: &khz }],
    )
}

fn cmd_trace(s: &Scenario) -> Result<Artifacts, CliError> {
    let det = detunings(&s.params, s.grid.center);
    let trace = run_schedule(&s.schedule, &det, &s.params, s.sample_dt)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let intensity = gated_intensity(&trace, &s.schedule, &s.params)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let rows: Vec<_> = trace.samples.iter().map(|st| (st.t, st.alpha, st.beta)).collect();
    let last = trace.samples.last().expect("nonempty trace");

    let mut artifacts = Artifacts::default();
    artifacts.add("trace.csv", trace_csv(&rows));
    artifacts.add_json(
        "report.json",
        &json!({
            "probe_detuning_hz": rad_per_us_to_hz(s.params.omega_m() - s.grid.center),
            "gated_intensity": intensity,
            "final": {
                "t_us": last.t,
                "re_alpha": last.alpha.re, "im_alpha": last.alpha.im,
                "re_beta": last.beta.re, "im_beta": last.beta.im,
            },
        }),
    )?;

    let abs_a: Vec<(f64, f64)> = trace.samples.iter().map(|st| (st.t, st.alpha.norm())).collect();
    let abs_b: Vec<(f64, f64)> = trace.samples.iter().map(|st| (st.t, st.beta.norm())).collect();
    artifacts.add(
        "plot.svg",
        line_plot(
            "sideband amplitudes",
            "t (us)",
            "amplitude",
            &[
                Series { label: "|alpha|", points: &abs_a },
                Series { label: "|beta|", points: &abs_b },
            ],
        ),
    );
    Ok(artifacts)
}

fn cmd_sweep(s: &Scenario) -> Result<Artifacts, CliError> {
    let spectrum = sweep(&s.params, &s.schedule, &s.grid, s.sample_dt)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let report = extract(&spectrum, s.band);
    let rows = spectrum_rows(&spectrum);

    let mut artifacts = Artifacts::default();
    artifacts.add("spectrum.csv", spectrum_csv(&rows));
    artifacts.add_json(
        "report.json",
        &json!({
            "detuning_convention": DETUNING_CONVENTION,
            "fringe": fringe_json(&report),
        }),
    )?;
    artifacts.add("plot.svg", spectrum_plot(&rows, "gated spectrum"));
    Ok(artifacts)
}

fn cmd_scan(s: &Scenario) -> Result<Artifacts, CliError> {
    let spec = s
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Validation("scan command needs a [scan] section".into()))?;
    let results = omri_core::analysis::scan(
        &s.params,
        &s.schedule,
        spec.axis,
        &spec.values,
        &s.grid,
        s.band,
        s.sample_dt,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut artifacts = Artifacts::default();
    let mut summary = Vec::new();
    let mut vis_curve = Vec::new();
    for ((value, spectrum, report), label) in results.iter().zip(&spec.labels) {
        let rows = spectrum_rows(spectrum);
        artifacts.add(format!("scan/{label}/spectrum.csv"), spectrum_csv(&rows));
        summary.push(json!({
            "value": label,
            "value_internal": value,
            "fringe": fringe_json(report),
        }));
        let x: f64 = label.parse().expect("labels are rendered from f64");
        vis_curve.push((x, report.visibility));
    }
    let axis_label = match spec.axis {
        ScanAxis::Tau2 => "tau2 (us)",
        ScanAxis::Gap => "T (us)",
        ScanAxis::GammaM => "gamma_m (kHz)",
    };
    artifacts.add_json(
        "report.json",
        &json!({
            "axis": axis_label,
            "detuning_convention": DETUNING_CONVENTION,
            "points": summary,
        }),
    )?;
    artifacts.add(
        "plot.svg",
        line_plot(
            "fringe visibility along the scan",
            axis_label,
            "visibility",
            &[Series { label: "", points: &vis_curve }],
        ),
    );
    Ok(artifacts)
}

fn cmd_fit(s: &Scenario, observed_path: Option<&Path>, seed: u64) -> Result<Artifacts, CliError> {
    let spec = s
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Validation("fit command needs a [fit] section".into()))?;
    let path = observed_path
        .ok_or_else(|| CliError::Validation("fit command needs --observed <csv>".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))?;
    let rows = parse_spectrum_csv(&text)?;

    // emitted convention is ascending y = ω_m − δ; the fitter wants δ ascending
    let om = s.params.omega_m();
    let mut points: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(y_hz, i)| (om - omri_core::units::hz_to_rad_per_us(y_hz), i))
        .collect();
    points.reverse();
    let observed = Spectrum {
        points,
        meta: SpectrumMeta {
            params: s.params,
            schedule: s.schedule,
            grid: s.grid,
            sample_dt: s.sample_dt,
        },
    };

    let opts = FitOptions {
        max_iters: spec.max_iters,
        seed,
        sample_dt: s.sample_dt,
        ..Default::default()
    };
    let result = fit(&observed, &s.params, &spec.free, &opts)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let deltas: Vec<f64> = observed.points.iter().map(|&(d, _)| d).collect();
    let fitted = intensities_at(&result.params_hat, &s.schedule, &deltas, s.sample_dt)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let fitted_rows: Vec<(f64, f64)> = deltas
        .iter()
        .zip(&fitted)
        .rev()
        .map(|(&d, &i)| (rad_per_us_to_hz(om - d), i))
        .collect();

    let p = &result.params_hat;
    let mut artifacts = Artifacts::default();
    artifacts.add("spectrum.csv", spectrum_csv(&fitted_rows));
    artifacts.add_json(
        "report.json",
        &json!({
            "residual_rms": result.residual,
            "iterations": result.iterations,
            "converged": result.converged,
            "params_hat_hz": {
                "kappa": rad_per_us_to_hz(p.kappa()),
                "kappa_e": rad_per_us_to_hz(p.kappa_e()),
                "kappa_i": rad_per_us_to_hz(p.kappa_i()),
                "gamma_m": rad_per_us_to_hz(p.gamma_m()),
                "omega_m": rad_per_us_to_hz(p.omega_m()),
                "delta": rad_per_us_to_hz(p.delta()),
                "big_g": rad_per_us_to_hz(p.big_g()),
            },
            "params_hat_internal": p,
        }),
    )?;

    let obs_khz: Vec<(f64, f64)> = rows.iter().map(|&(hz, i)| (hz / 1e3, i)).collect();
    let fit_khz: Vec<(f64, f64)> = fitted_rows.iter().map(|&(hz, i)| (hz / 1e3, i)).collect();
    artifacts.add(
        "plot.svg",
        line_plot(
            "observed vs fitted spectrum",
            "detuning (kHz)",
            "normalized intensity",
            &[
                Series { label: "observed", points: &obs_khz },
                Series { label: "fitted", points: &fit_khz },
            ],
        ),
    );
    Ok(artifacts)
}

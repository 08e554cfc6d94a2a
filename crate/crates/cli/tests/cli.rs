//! End-to-end command tests against the library entry points and the
//! shipped scenario presets.

use std::fs;
use std::path::{Path, PathBuf};

use omri_cli::commands::{execute, CommandKind, RunContext};
use omri_cli::scenario::{parse_scenario, resolve_scenario, RawScenario};
use omri_cli::CliError;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Small, fast scenario for end-to-end runs.
fn small_scenario(extra: &str) -> String {
    format!(
        r#"
[physical]
kappa_e = "15 MHz"
kappa_i = "15 MHz"
gamma_m = "20 kHz"
omega_m = "94 MHz"
big_g = "0.58 MHz"

[schedule]
tau1 = "4 us"
gap = "4 us"
tau2 = "1 us"
gate = "1 us"

[grid]
span = "1.2 MHz"
points = 101

[run]
sample_dt = "10 ns"
band = "0.7 MHz"
{extra}
"#
    )
}

fn ctx(command: CommandKind, scenario_text: &str, out: &Path) -> RunContext {
    RunContext {
        command,
        scenario: parse_scenario(scenario_text).unwrap(),
        out_dir: out.to_path_buf(),
        workers: 0,
        seed: 0,
        observed: None,
    }
}

#[test]
fn shipped_presets_parse() {
    let dir = scenarios_dir();
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        parse_scenario(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 11, "expected the shipped presets, found {seen}");
}

#[test]
fn fig3a_round_trips_through_reserialization() {
    let text = fs::read_to_string(scenarios_dir().join("fig3a.toml")).unwrap();
    let raw: RawScenario = toml::from_str(&text).unwrap();
    let first = resolve_scenario(&raw).unwrap();
    let reserialized = toml::to_string(&raw).unwrap();
    let second = parse_scenario(&reserialized).unwrap();
    assert_eq!(first, second);
    // spot-check the physical numbers landed in internal units
    assert!((first.params.kappa() - std::f64::consts::TAU * 30.0).abs() < 1e-12);
    assert!((first.schedule.tau1 - 4.0).abs() < 1e-15);
    assert_eq!(first.grid.points, 2001);
}

#[test]
fn sweep_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let written = execute(&ctx(CommandKind::Sweep, &small_scenario(""), dir.path())).unwrap();
    assert_eq!(written.len(), 4);

    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102); // header + one row per grid point
    assert!(csv.starts_with("detuning_hz,intensity\n"));

    let svg = fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.contains("<path"));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["fringe"]["visibility"].as_f64().unwrap() > 0.0);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["command"], "sweep");
    assert!(manifest["timing"]["started_unix_s"].as_u64().unwrap() > 0);
}

#[test]
fn sweep_on_shipped_fig3a_emits_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenarios_dir().join("fig3a.toml")).unwrap();
    execute(&ctx(CommandKind::Sweep, &text, dir.path())).unwrap();
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2002); // header + 2001 grid points
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["fringe"]["period_hz"].as_f64().unwrap() > 0.0, "fringes expected");
    assert!(fs::read_to_string(dir.path().join("plot.svg")).unwrap().contains("<path"));
}

#[test]
fn trace_with_zero_probe_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_scenario("").replace("gate = \"1 us\"", "gate = \"1 us\"\nprobe_amp = 0.0");
    execute(&ctx(CommandKind::Trace, &text, dir.path())).unwrap();
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let mut cols = line.split(',');
        cols.next(); // time column advances
        for v in cols {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0, "nonzero amplitude in {line}");
        }
    }
}

#[test]
fn scan_emits_per_value_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_scenario("\n[scan]\naxis = \"gap\"\nvalues = [\"2 us\", \"6 us\"]\n");
    execute(&ctx(CommandKind::Scan, &text, dir.path())).unwrap();
    assert!(dir.path().join("scan/2/spectrum.csv").exists());
    assert!(dir.path().join("scan/6/spectrum.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let points = report["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0]["value"], "2");
    // longer free evolution → finer fringes
    let p0 = points[0]["fringe"]["period_hz"].as_f64().unwrap();
    let p1 = points[1]["fringe"]["period_hz"].as_f64().unwrap();
    assert!(p1 < p0, "period should shrink with T: {p0} vs {p1}");
}

#[test]
fn fit_round_trip_recovers_generating_coupling() {
    let truth_dir = tempfile::tempdir().unwrap();
    execute(&ctx(CommandKind::Sweep, &small_scenario(""), truth_dir.path())).unwrap();

    let fit_dir = tempfile::tempdir().unwrap();
    let text = small_scenario("\n[fit]\nfree = [\"big_g\"]\n")
        .replace("big_g = \"0.58 MHz\"", "big_g = \"0.4 MHz\"");
    let mut c = ctx(CommandKind::Fit, &text, fit_dir.path());
    c.observed = Some(truth_dir.path().join("spectrum.csv"));
    execute(&c).unwrap();

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fit_dir.path().join("report.json")).unwrap())
            .unwrap();
    let g_hz = report["params_hat_hz"]["big_g"].as_f64().unwrap();
    assert!((g_hz - 0.58e6).abs() / 0.58e6 < 0.01, "recovered G = {g_hz} Hz");
    assert!(report["converged"].as_bool().unwrap());
}

#[test]
fn fit_without_observed_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_scenario("\n[fit]\nfree = [\"big_g\"]\n");
    let err = execute(&ctx(CommandKind::Fit, &text, dir.path())).unwrap_err();
    assert_eq!(err.exit_code(), 1, "{err}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0, "no partial outputs");
}

#[test]
fn scan_without_section_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = execute(&ctx(CommandKind::Scan, &small_scenario(""), dir.path())).unwrap_err();
    assert_eq!(err.exit_code(), 1, "{err}");
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("occupied");
    fs::write(&blocker, "a file where the output directory should go").unwrap();
    let err = execute(&ctx(CommandKind::Sweep, &small_scenario(""), &blocker)).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
}

#[test]
fn identical_runs_are_byte_identical_across_worker_counts() {
    let text = small_scenario("");
    let mut outputs = Vec::new();
    for workers in [1usize, 3] {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ctx(CommandKind::Sweep, &text, dir.path());
        c.workers = workers;
        execute(&c).unwrap();
        let csv = fs::read(dir.path().join("spectrum.csv")).unwrap();
        let report = fs::read(dir.path().join("report.json")).unwrap();
        let svg = fs::read(dir.path().join("plot.svg")).unwrap();
        outputs.push((csv, report, svg));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn exit_codes_map_to_error_kinds() {
    assert_eq!(CliError::Validation("x".into()).exit_code(), 1);
    assert_eq!(CliError::Runtime("x".into()).exit_code(), 2);
}

//! Scenario file ingestion: TOML with unit-suffixed quantity strings,
//! strict schema (unknown keys rejected), two-phase validation so every
//! missing or invalid key is reported at once.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use omri_core::analysis::{FreeParam, GridSpec, ScanAxis};
use omri_core::model::PhysicalParams;
use omri_core::schedule::PulseSchedule;
use omri_core::units::{hz_to_rad_per_us, seconds_to_us};

use crate::CliError;

/// "30 MHz", "20kHz", "0.5 Hz", "1 GHz" → rad/µs (the 2π folded in).
pub fn parse_frequency(s: &str) -> Result<f64, String> {
    let (value, unit) = split_quantity(s)?;
    let hz = match unit {
        "Hz" => value,
        "kHz" => value * 1e3,
        "MHz" => value * 1e6,
        "GHz" => value * 1e9,
        other => return Err(format!("unknown frequency unit '{other}' (use Hz, kHz, MHz, GHz)")),
    };
    Ok(hz_to_rad_per_us(hz))
}

/// "4 us", "1ns", "0.001 ms", "1e-6 s" → µs.
pub fn parse_time(s: &str) -> Result<f64, String> {
    let (value, unit) = split_quantity(s)?;
    let seconds = match unit {
        "s" => value,
        "ms" => value * 1e-3,
        "us" => value * 1e-6,
        "ns" => value * 1e-9,
        other => return Err(format!("unknown time unit '{other}' (use s, ms, us, ns)")),
    };
    Ok(seconds_to_us(seconds))
}

fn split_quantity(s: &str) -> Result<(f64, &str), String> {
    let trimmed = s.trim();
    let split = trimmed
        .char_indices()
        .find(|&(_, c)| c.is_alphabetic())
        .map(|(i, _)| i)
        .ok_or_else(|| format!("'{trimmed}' has no unit suffix"))?;
    let (num, unit) = trimmed.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("'{}' is not a number in '{trimmed}'", num.trim()))?;
    Ok((value, unit.trim()))
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub physical: Option<RawPhysical>,
    pub schedule: Option<RawSchedule>,
    pub grid: Option<RawGrid>,
    pub run: Option<RawRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<RawScan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RawFit>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPhysical {
    pub kappa_e: Option<String>,
    pub kappa_i: Option<String>,
    pub gamma_m: Option<String>,
    pub omega_m: Option<String>,
    /// Drive detuning Δ; omitted = locked to the red sideband (Δ = ω_m).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    pub big_g: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSchedule {
    pub tau1: Option<String>,
    pub gap: Option<String>,
    pub tau2: Option<String>,
    pub gate: Option<String>,
    /// Probe amplitude |E_p| (arbitrary linear units; spectra are
    /// normalized by it). Default 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_amp: Option<f64>,
    /// Relative phase of the second probe pulse, rad. Default 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse2_phase_rad: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    /// Grid center in δ = ω_p − ω_l; omitted = ω_m (central dip at y = 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    pub span: Option<String>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    /// Trace sample step. Default "1 ns".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<String>,
    /// Full width of the fringe-analysis band. Default "0.7 MHz".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScan {
    /// One of "tau2", "gap", "gamma_m".
    pub axis: Option<String>,
    /// Unit-suffixed values: times for tau2/gap, frequencies for gamma_m.
    pub values: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFit {
    /// Subset of "big_g", "kappa", "gamma_m", "delta_offset".
    pub free: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub axis: ScanAxis,
    /// Converted to internal units (µs or rad/µs).
    pub values: Vec<f64>,
    /// Natural-unit labels for output paths (µs or kHz).
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSpec {
    pub free: Vec<FreeParam>,
    pub max_iters: usize,
}

/// Fully validated scenario in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: PhysicalParams,
    pub schedule: PulseSchedule,
    pub grid: GridSpec,
    pub sample_dt: f64,
    pub band: f64,
    pub scan: Option<ScanSpec>,
    pub fit: Option<FitSpec>,
}

/// Collects problems across the whole document before failing.
#[derive(Default)]
struct Check {
    missing: Vec<String>,
    invalid: Vec<String>,
}

impl Check {
    /// Parses an optional quantity, recording a parse failure.
    fn quantity(
        &mut self,
        path: &str,
        v: Option<&String>,
        parse: fn(&str) -> Result<f64, String>,
    ) -> Option<f64> {
        match v.map(|s| parse(s)) {
            Some(Ok(x)) => Some(x),
            Some(Err(e)) => {
                self.invalid.push(format!("{path}: {e}"));
                None
            }
            None => None,
        }
    }

    /// Requires and parses a quantity leaf inside an optional section. A
    /// missing section is reported once at section level, not per leaf.
    fn req_quantity<'a, S>(
        &mut self,
        path: &str,
        section: Option<&'a S>,
        get: fn(&'a S) -> &'a Option<String>,
        parse: fn(&str) -> Result<f64, String>,
    ) -> Option<f64> {
        let v = match section {
            Some(s) => {
                let v = get(s);
                if v.is_none() {
                    self.missing.push(path.to_string());
                }
                v.as_ref()
            }
            None => None,
        };
        self.quantity(path, v, parse)
    }

    fn into_error(self) -> Option<CliError> {
        if self.missing.is_empty() && self.invalid.is_empty() {
            return None;
        }
        let mut lines = Vec::new();
        if !self.missing.is_empty() {
            lines.push(format!("missing required keys: {}", self.missing.join(", ")));
        }
        lines.extend(self.invalid);
        Some(CliError::Validation(lines.join("\n")))
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let raw: RawScenario = toml::from_str(text)
        .map_err(|e| CliError::Validation(format!("scenario parse error: {e}")))?;
    resolve_scenario(&raw)
}

pub fn resolve_scenario(raw: &RawScenario) -> Result<Scenario, CliError> {
    let mut ck = Check::default();

    let phys = raw.physical.as_ref();
    if phys.is_none() {
        ck.missing.push("physical".into());
    }
    let kappa_e = ck.req_quantity("physical.kappa_e", phys, |p| &p.kappa_e, parse_frequency);
    let kappa_i = ck.req_quantity("physical.kappa_i", phys, |p| &p.kappa_i, parse_frequency);
    let gamma_m = ck.req_quantity("physical.gamma_m", phys, |p| &p.gamma_m, parse_frequency);
    let omega_m = ck.req_quantity("physical.omega_m", phys, |p| &p.omega_m, parse_frequency);
    let delta = ck.quantity("physical.delta", phys.and_then(|p| p.delta.as_ref()), parse_frequency);
    let big_g = ck.req_quantity("physical.big_g", phys, |p| &p.big_g, parse_frequency);

    let sched = raw.schedule.as_ref();
    if sched.is_none() {
        ck.missing.push("schedule".into());
    }
    let tau1 = ck.req_quantity("schedule.tau1", sched, |s| &s.tau1, parse_time);
    let gap = ck.req_quantity("schedule.gap", sched, |s| &s.gap, parse_time);
    let tau2 = ck.req_quantity("schedule.tau2", sched, |s| &s.tau2, parse_time);
    let gate = ck.req_quantity("schedule.gate", sched, |s| &s.gate, parse_time);
    let probe_amp = sched.and_then(|s| s.probe_amp).unwrap_or(1.0);
    let phase2 = sched.and_then(|s| s.pulse2_phase_rad).unwrap_or(0.0);

    let grid_raw = raw.grid.as_ref();
    if grid_raw.is_none() {
        ck.missing.push("grid".into());
    }
    let center = ck.quantity("grid.center", grid_raw.and_then(|g| g.center.as_ref()), parse_frequency);
    let span = ck.req_quantity("grid.span", grid_raw, |g| &g.span, parse_frequency);
    let points = grid_raw.and_then(|g| {
        if g.points.is_none() {
            ck.missing.push("grid.points".into());
        }
        g.points
    });

    let run = raw.run.as_ref();
    let sample_dt = ck
        .quantity("run.sample_dt", run.and_then(|r| r.sample_dt.as_ref()), parse_time)
        .unwrap_or(1e-3);
    let band = ck
        .quantity("run.band", run.and_then(|r| r.band.as_ref()), parse_frequency)
        .unwrap_or(parse_frequency("0.7 MHz").unwrap());

    let scan = resolve_scan(raw.scan.as_ref(), &mut ck);
    let fit = resolve_fit(raw.fit.as_ref(), &mut ck);

    if let Some(e) = ck.into_error() {
        return Err(e);
    }
    // all present and unit-parsed past this point
    let (kappa_e, kappa_i, gamma_m, omega_m, big_g) = (
        kappa_e.unwrap(),
        kappa_i.unwrap(),
        gamma_m.unwrap(),
        omega_m.unwrap(),
        big_g.unwrap(),
    );

    // name the offending key before the model collapses κ_e + κ_i into κ
    let mut violations = Vec::new();
    for (path, v) in [
        ("physical.kappa_e", kappa_e),
        ("physical.kappa_i", kappa_i),
        ("physical.big_g", big_g),
    ] {
        if v < 0.0 {
            violations.push(format!("{path}: must be non-negative, got {v} rad/µs"));
        }
    }
    for (path, v) in [("physical.gamma_m", gamma_m), ("physical.omega_m", omega_m)] {
        if !(v > 0.0) {
            violations.push(format!("{path}: must be positive, got {v} rad/µs"));
        }
    }
    if !violations.is_empty() {
        return Err(CliError::Validation(violations.join("\n")));
    }
    let params = PhysicalParams::new(kappa_e, kappa_i, gamma_m, omega_m, delta, big_g)
        .map_err(|e| CliError::Validation(format!("physical: {e}")))?;
    let mut schedule = PulseSchedule::second_pair(
        tau1.unwrap(),
        gap.unwrap(),
        tau2.unwrap(),
        gate.unwrap(),
        Complex64::new(probe_amp, 0.0),
    )
    .map_err(|e| CliError::Validation(format!("schedule: {e}")))?;
    schedule.pulse2_phase = phase2;

    let grid = GridSpec {
        center: center.unwrap_or(params.omega_m()),
        span: span.unwrap(),
        points: points.unwrap(),
    };
    if grid.points < 2 {
        return Err(CliError::Validation(format!(
            "grid.points: need >= 2, got {}",
            grid.points
        )));
    }
    if !(sample_dt > 0.0) {
        return Err(CliError::Validation(format!("run.sample_dt: must be > 0, got {sample_dt} µs")));
    }
    if !(band > 0.0) {
        return Err(CliError::Validation(format!("run.band: must be > 0, got {band} rad/µs")));
    }

    Ok(Scenario { params, schedule, grid, sample_dt, band, scan, fit })
}

fn resolve_scan(raw: Option<&RawScan>, ck: &mut Check) -> Option<ScanSpec> {
    let raw = raw?;
    let axis = match raw.axis.as_deref() {
        Some("tau2") => Some(ScanAxis::Tau2),
        Some("gap") => Some(ScanAxis::Gap),
        Some("gamma_m") => Some(ScanAxis::GammaM),
        Some(other) => {
            ck.invalid.push(format!("scan.axis: unknown axis '{other}' (use tau2, gap, gamma_m)"));
            None
        }
        None => {
            ck.missing.push("scan.axis".into());
            None
        }
    };
    let values_raw = match &raw.values {
        Some(v) if !v.is_empty() => Some(v),
        Some(_) => {
            ck.invalid.push("scan.values: must be nonempty".into());
            None
        }
        None => {
            ck.missing.push("scan.values".into());
            None
        }
    };
    let axis = axis?;
    let values_raw = values_raw?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, s) in values_raw.iter().enumerate() {
        let parsed = match axis {
            ScanAxis::Tau2 | ScanAxis::Gap => parse_time(s).map(|us| (us, format!("{us}"))),
            ScanAxis::GammaM => parse_frequency(s).map(|w| {
                let khz = omri_core::units::rad_per_us_to_hz(w) / 1e3;
                (w, format!("{khz}"))
            }),
        };
        match parsed {
            Ok((v, label)) => {
                values.push(v);
                labels.push(label);
            }
            Err(e) => ck.invalid.push(format!("scan.values[{i}]: {e}")),
        }
    }
    Some(ScanSpec { axis, values, labels })
}

fn resolve_fit(raw: Option<&RawFit>, ck: &mut Check) -> Option<FitSpec> {
    let raw = raw?;
    let names = match &raw.free {
        Some(v) if !v.is_empty() => v,
        Some(_) => {
            ck.invalid.push("fit.free: must be nonempty".into());
            return None;
        }
        None => {
            ck.missing.push("fit.free".into());
            return None;
        }
    };
    let mut free = Vec::new();
    for (i, n) in names.iter().enumerate() {
        match n.as_str() {
            "big_g" => free.push(FreeParam::BigG),
            "kappa" => free.push(FreeParam::Kappa),
            "gamma_m" => free.push(FreeParam::GammaM),
            "delta_offset" => free.push(FreeParam::DeltaOffset),
            other => ck.invalid.push(format!(
                "fit.free[{i}]: unknown parameter '{other}' (use big_g, kappa, gamma_m, delta_offset)"
            )),
        }
    }
    Some(FitSpec { free, max_iters: raw.max_iters.unwrap_or(2000) })
}

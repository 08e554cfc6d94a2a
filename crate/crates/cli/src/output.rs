//! Artifact staging and serialization: full-precision CSV, JSON reports,
//! and the run manifest. Artifacts are accumulated in memory and committed
//! in one pass so a failed run leaves no partial outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Full-precision scientific notation (17 significant digits), so equal
/// runs produce byte-identical files.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// In-memory artifact set, committed atomically-ish: nothing is written
/// until the run succeeds, and a failed commit removes what it wrote.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, rel_path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((rel_path.into(), bytes.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, rel_path: impl Into<PathBuf>, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Runtime(format!("serializing JSON: {e}")))?;
        text.push('\n');
        self.add(rel_path, text);
        Ok(())
    }

    pub fn paths(&self) -> Vec<&Path> {
        self.files.iter().map(|(p, _)| p.as_path()).collect()
    }

    pub fn commit(self, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        for (rel, bytes) in &self.files {
            let path = out_dir.join(rel);
            let res = (|| -> std::io::Result<()> {
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent)?;
                }
                fs::write(&path, bytes)
            })();
            if let Err(e) = res {
                for w in &written {
                    let _ = fs::remove_file(w);
                }
                return Err(CliError::Runtime(format!("writing {}: {e}", path.display())));
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Spectrum rows as `detuning_hz,intensity`, detuning reported as
/// y/2π = (ω_m − δ)/2π so the central dip sits at zero, ascending.
pub fn spectrum_csv(points_y_hz: &[(f64, f64)]) -> String {
    let mut out = String::from("detuning_hz,intensity\n");
    for &(y_hz, intensity) in points_y_hz {
        out.push_str(&fmt_f64(y_hz));
        out.push(',');
        out.push_str(&fmt_f64(intensity));
        out.push('\n');
    }
    out
}

/// Trace rows as `t_us,re_alpha,im_alpha,re_beta,im_beta`.
pub fn trace_csv(samples: &[(f64, num_complex::Complex64, num_complex::Complex64)]) -> String {
    let mut out = String::from("t_us,re_alpha,im_alpha,re_beta,im_beta\n");
    for &(t, a, b) in samples {
        out.push_str(&fmt_f64(t));
        for v in [a.re, a.im, b.re, b.im] {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

/// Parses a spectrum CSV in the emitted format back into (y_hz, intensity).
pub fn parse_spectrum_csv(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Validation("observed CSV is empty".into()))?;
    if header.trim() != "detuning_hz,intensity" {
        return Err(CliError::Validation(format!(
            "observed CSV header must be 'detuning_hz,intensity', got '{header}'"
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |s: Option<&str>| -> Option<f64> { s?.trim().parse().ok() };
        match (parse(cols.next()), parse(cols.next()), cols.next()) {
            (Some(y), Some(intensity), None) => rows.push((y, intensity)),
            _ => {
                return Err(CliError::Validation(format!(
                    "observed CSV row {}: expected two numeric columns, got '{line}'",
                    i + 2
                )))
            }
        }
    }
    if rows.len() < 2 {
        return Err(CliError::Validation("observed CSV needs at least 2 rows".into()));
    }
    Ok(rows)
}

pub const SCHEMA_VERSION: u32 = 1;

/// Run manifest. Timing lives in its own field so everything else is
/// byte-stable across identical runs.
#[derive(Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub seed: u64,
    pub workers: usize,
    /// Convention note for the spectrum detuning axis.
    pub detuning_convention: &'static str,
    /// Fully resolved inputs, internal units (rad/µs, µs).
    pub resolved: serde_json::Value,
    /// The only volatile section: wall-clock timestamp and duration.
    pub timing: Timing,
}

#[derive(Serialize)]
pub struct Timing {
    pub started_unix_s: u64,
    pub wall_time_ms: u64,
}

pub const DETUNING_CONVENTION: &str =
    "detuning_hz = (omega_m - delta_pl)/2pi; the central dip sits at zero";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rows = vec![(-1.5e5, 0.25), (0.0, 0.031), (1.5e5, 0.26)];
        let text = spectrum_csv(&rows);
        let back = parse_spectrum_csv(&text).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(parse_spectrum_csv("wrong,header\n1,2\n").is_err());
        assert!(parse_spectrum_csv("detuning_hz,intensity\n1,abc\n2,3\n").is_err());
        assert!(parse_spectrum_csv("detuning_hz,intensity\n1,2,3\n4,5\n").is_err());
        assert!(parse_spectrum_csv("detuning_hz,intensity\n1,2\n").is_err());
    }

    #[test]
    fn fmt_is_full_precision() {
        let v = std::f64::consts::PI * 1e5;
        let s = fmt_f64(v);
        let back: f64 = s.parse().unwrap();
        assert_eq!(v, back);
    }
}

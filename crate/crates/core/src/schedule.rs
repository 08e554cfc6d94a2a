//! Ramsey pulse protocol and its compilation into constant-coefficient
//! segments plus a detection gate.
//!
//! The protocol is two square pulse pairs: drive+probe on for τ₁, free
//! evolution for T, drive+probe on again for τ₂. In the default
//! (second-pair) mode the detection gate's trailing edge defines τ₂, so the
//! gate ends exactly at the simulated horizon τ₁+T+τ₂.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("invalid schedule: {}", violations.join("; "))]
    Invalid { violations: Vec<String> },
    #[error("first-pulse gate [{start}, {end}] µs exceeds tau1 = {tau1} µs")]
    GateBeyondFirstPulse { start: f64, end: f64, tau1: f64 },
}

/// Two-pulse Ramsey schedule. Times in µs, t = 0 at first pulse onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// First pulse-pair width τ₁.
    pub tau1: f64,
    /// Free-evolution time T.
    pub gap: f64,
    /// Effective second pulse width τ₂.
    pub tau2: f64,
    /// Leading edge of the detection gate (absolute time).
    pub gate_start: f64,
    /// Gate duration.
    pub gate_len: f64,
    /// Probe amplitude E_p during pulses.
    pub probe_amp: Complex64,
    /// Relative phase of the second probe pulse (phase-coherent default 0).
    pub pulse2_phase: f64,
    /// Second-pulse amplitude override for sensitivity studies.
    pub probe_amp2: Option<Complex64>,
}

impl PulseSchedule {
    /// Standard Ramsey schedule with the gate ending at the horizon
    /// (trailing edge defines τ₂).
    pub fn second_pair(
        tau1: f64,
        gap: f64,
        tau2: f64,
        gate_len: f64,
        probe_amp: Complex64,
    ) -> Result<Self, ScheduleError> {
        let horizon = tau1 + gap + tau2;
        let s = Self {
            tau1,
            gap,
            tau2,
            gate_start: horizon - gate_len,
            gate_len,
            probe_amp,
            pulse2_phase: 0.0,
            probe_amp2: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn horizon(&self) -> f64 {
        self.tau1 + self.gap + self.tau2
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        let mut violations = Vec::new();
        if !(self.tau1 > 0.0) {
            violations.push(format!("tau1 must be > 0, got {}", self.tau1));
        }
        if !(self.tau2 > 0.0) {
            violations.push(format!("tau2 must be > 0, got {}", self.tau2));
        }
        if !(self.gap >= 0.0) {
            violations.push(format!("gap must be >= 0, got {}", self.gap));
        }
        if !(self.gate_len > 0.0) {
            violations.push(format!("gate_len must be > 0, got {}", self.gate_len));
        }
        if !(self.gate_start >= 0.0)
            || self.gate_start + self.gate_len > self.horizon() + 1e-12 * self.horizon().abs()
        {
            violations.push(format!(
                "gate [{}, {}] µs must lie within the horizon [0, {}] µs",
                self.gate_start,
                self.gate_start + self.gate_len,
                self.horizon()
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ScheduleError::Invalid { violations })
        }
    }

    /// Moves the gate inside the first pulse with delay `t_prime` from pulse
    /// onset. Reproduces the transient-OMIT reference curves taken without
    /// the second pulse pair contributing to detection.
    pub fn first_pulse_gate(&self, t_prime: f64) -> Result<Self, ScheduleError> {
        if t_prime < 0.0 || t_prime + self.gate_len > self.tau1 + 1e-12 * self.tau1 {
            return Err(ScheduleError::GateBeyondFirstPulse {
                start: t_prime,
                end: t_prime + self.gate_len,
                tau1: self.tau1,
            });
        }
        let mut s = *self;
        s.gate_start = t_prime;
        s.validate()?;
        Ok(s)
    }

    fn probe2(&self) -> Complex64 {
        self.probe_amp2.unwrap_or(self.probe_amp) * Complex64::from_polar(1.0, self.pulse2_phase)
    }
}

/// One constant-coefficient stretch of the protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    /// Coupling G active (drive pulse on).
    pub g_on: bool,
    /// Probe amplitude E_p in this segment.
    pub probe: Complex64,
}

/// Compiles the schedule into (τ₁, on), (T, off), (τ₂, on). Zero-duration
/// segments are dropped and adjacent identical segments merged, so an
/// empty-gap schedule yields a single on-segment of width τ₁+τ₂.
pub fn compile(schedule: &PulseSchedule) -> Result<Vec<Segment>, ScheduleError> {
    schedule.validate()?;
    let raw = [
        Segment { duration: schedule.tau1, g_on: true, probe: schedule.probe_amp },
        Segment { duration: schedule.gap, g_on: false, probe: Complex64::new(0.0, 0.0) },
        Segment { duration: schedule.tau2, g_on: true, probe: schedule.probe2() },
    ];
    let mut out: Vec<Segment> = Vec::with_capacity(3);
    for seg in raw {
        if seg.duration == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(prev) if prev.g_on == seg.g_on && prev.probe == seg.probe => {
                prev.duration += seg.duration;
            }
            _ => out.push(seg),
        }
    }
    Ok(out)
}

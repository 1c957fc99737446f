//! Piecewise-constant drive envelopes and measurement-sequence timing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One constant-amplitude span of a drive envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    /// Complex drive amplitude ε (rad/µs) in the frame of the drive carrier.
    pub amplitude: Complex64,
    /// Length of the span (µs), strictly positive.
    pub duration: f64,
}

impl PulseSegment {
    pub fn new(amplitude: Complex64, duration: f64) -> Self {
        PulseSegment { amplitude, duration }
    }

    /// Real-amplitude convenience constructor.
    pub fn real(amplitude: f64, duration: f64) -> Self {
        Self::new(Complex64::new(amplitude, 0.0), duration)
    }
}

/// A drive envelope: an ordered list of constant segments starting at t = 0.
/// After the last segment the drive is off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    label: String,
    segments: Vec<PulseSegment>,
}

impl PulseEnvelope {
    /// Build an envelope, rejecting empty segment lists, non-positive or
    /// non-finite durations, and non-finite amplitudes.
    pub fn new(label: impl Into<String>, segments: Vec<PulseSegment>) -> Result<Self> {
        let label = label.into();
        if segments.is_empty() {
            return Err(Error::Argument(format!("pulse '{label}' has no segments")));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return Err(Error::Argument(format!(
                    "pulse '{label}' segment {i}: duration must be positive and finite, got {}",
                    s.duration
                )));
            }
            if !s.amplitude.re.is_finite() || !s.amplitude.im.is_finite() {
                return Err(Error::Argument(format!(
                    "pulse '{label}' segment {i}: amplitude must be finite, got {}",
                    s.amplitude
                )));
            }
        }
        Ok(PulseEnvelope { label, segments })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    /// Total length of the envelope (µs).
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Cumulative segment end times, the last equal to [`total_duration`](Self::total_duration).
    pub fn boundaries(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.segments
            .iter()
            .map(|s| {
                acc += s.duration;
                acc
            })
            .collect()
    }

    /// Drive amplitude at time `t`. Each segment covers `[start, end)`;
    /// outside `[0, total)` the drive is off.
    pub fn amplitude_at(&self, t: f64) -> Complex64 {
        if t < 0.0 {
            return Complex64::ZERO;
        }
        let mut start = 0.0;
        for s in &self.segments {
            let end = start + s.duration;
            if t < end {
                return s.amplitude;
            }
            start = end;
        }
        Complex64::ZERO
    }

    /// Largest amplitude magnitude over all segments.
    pub fn peak_amplitude(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.amplitude.norm())
            .fold(0.0, f64::max)
    }
}

/// Timing of the measurement sequence around a reset pulse: first readout,
/// reset window, idle buffer, Ramsey probe (two π/2 gates separated by the
/// variable delay), and the second readout.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SequenceTiming {
    /// Wait between the end of the first readout pulse and the Ramsey pair (µs).
    pub t_relax: f64,
    /// Largest Ramsey delay acquired (µs).
    pub t_r_max: f64,
    /// Idle buffer between the Ramsey pair and the second readout (µs).
    pub t_buffer: f64,
    /// Second readout length (µs).
    pub t_m2: f64,
    /// Length of one π/2 gate (µs).
    pub t_gate: f64,
}

impl Default for SequenceTiming {
    fn default() -> Self {
        SequenceTiming {
            t_relax: 0.0,
            t_r_max: 0.6,
            t_buffer: 0.4,
            t_m2: 10.0,
            t_gate: 0.008,
        }
    }
}

impl SequenceTiming {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_relax", self.t_relax),
            ("t_r_max", self.t_r_max),
            ("t_buffer", self.t_buffer),
            ("t_m2", self.t_m2),
            ("t_gate", self.t_gate),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Argument(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Wall-clock length of one shot: readout pulse, relax wait, Ramsey pair
    /// with delay `t_r`, buffer, and the final readout.
    pub fn shot_length(&self, pulse_total: f64, t_r: f64) -> f64 {
        pulse_total + self.t_relax + 2.0 * self.t_gate + t_r + self.t_buffer + self.t_m2
    }
}

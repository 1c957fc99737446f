//! End-to-end scenario runner: each scenario reproduces one figure-style
//! pipeline (sweep → simulate → fit → artifact files) from a device config,
//! a seed, and a set of named numeric settings.
//!
//! Scenarios write CSV/JSON artifacts plus a reproducibility manifest into an
//! output directory (see [`output`]); they are batch tools, not interactive
//! ones. Every default setting can be overridden from the command line with
//! `--set key=value`.

mod output;
mod scenarios;

pub use output::{OutputWriter, ResolvedConstants, RunConfigRecord, RunSummary};

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::device::DeviceConfig;
use crate::error::{Error, Result};

/// The built-in scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Residual population vs wait time after a square readout pulse.
    DecaySweep,
    /// Residual population vs drive power at fixed wait, with Kerr model curves.
    PowerSweep,
    /// Phase-space trajectories of square vs CLEAR pulses, thermally mixed.
    TrajectoryCompare,
    /// Residual population vs power for CLEAR against a square pulse plus wait.
    ClearVsSquare,
    /// CLEAR with shortened ring-down segments across the power sweep.
    ShortenedClear,
    /// Empirical ring-down tuning on the simulated measurement loop.
    OptimizeRun,
    /// One synthesized-and-fitted Ramsey trace.
    RamseySingle,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::DecaySweep,
        ScenarioKind::PowerSweep,
        ScenarioKind::TrajectoryCompare,
        ScenarioKind::ClearVsSquare,
        ScenarioKind::ShortenedClear,
        ScenarioKind::OptimizeRun,
        ScenarioKind::RamseySingle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::DecaySweep => "decay_sweep",
            ScenarioKind::PowerSweep => "power_sweep",
            ScenarioKind::TrajectoryCompare => "trajectory_compare",
            ScenarioKind::ClearVsSquare => "clear_vs_square",
            ScenarioKind::ShortenedClear => "shortened_clear",
            ScenarioKind::OptimizeRun => "optimize_run",
            ScenarioKind::RamseySingle => "ramsey_single",
        }
    }

    /// Parse a scenario name; `-` and `_` are interchangeable.
    pub fn parse(name: &str) -> Result<Self> {
        let canon = name.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == canon)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scenario '{name}' (expected one of: {})",
                    Self::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }

    /// Default settings, each overridable via `--set key=value`. Boolean-like
    /// keys (`kerr`) read 0 as off, anything else as on.
    pub fn default_settings(self) -> &'static [(&'static str, f64)] {
        match self {
            ScenarioKind::DecaySweep => &[
                ("p_norm", 2.0),
                ("t_relax_max", 1.0),
                ("t_points", 11.0),
                ("t_m1", 2.0),
                ("noise_sigma", 0.0),
            ],
            ScenarioKind::PowerSweep => &[
                ("t_relax", 0.04),
                ("kerr", 1.0),
                ("noise_sigma", 0.0),
                ("p_min", 0.25),
                ("p_max", 12.0),
                ("p_count", 0.0),
            ],
            ScenarioKind::TrajectoryCompare => &[
                ("p_norm", 3.6),
                ("p_thermal", 0.2),
                ("sample_interval", 0.024),
                ("t_m1", 2.0),
                ("t_up", 0.15),
                ("t_dn", 0.15),
                ("kerr", 1.0),
            ],
            ScenarioKind::ClearVsSquare => &[
                ("kerr", 1.0),
                ("noise_sigma", 0.0),
                ("t_m1", 2.0),
                ("t_up", 0.15),
                ("t_dn", 0.15),
                ("p_min", 0.25),
                ("p_max", 12.0),
                ("p_count", 0.0),
            ],
            ScenarioKind::ShortenedClear => &[
                ("kerr", 1.0),
                ("noise_sigma", 0.0),
                ("t_m1", 2.0),
                ("t_up", 0.15),
                ("t_dn", 0.12),
                ("p_min", 0.25),
                ("p_max", 12.0),
                ("p_count", 0.0),
            ],
            ScenarioKind::OptimizeRun => &[
                ("p_norm", 10.0),
                ("t_m1", 2.0),
                ("t_up", 0.15),
                ("t_dn", 0.12),
                ("kerr", 1.0),
                ("noise_sigma", 0.01),
                ("max_iterations", 300.0),
                ("f_tol", 1e-3),
            ],
            ScenarioKind::RamseySingle => &[
                ("n0", 0.9),
                ("phi0", 0.3),
                ("noise_sigma", 0.02),
                ("detuning_mhz", 10.0),
            ],
        }
    }
}

/// Pulse family for the standalone `simulate` pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    Square,
    Clear,
}

impl PulseShape {
    pub fn name(self) -> &'static str {
        match self {
            PulseShape::Square => "square",
            PulseShape::Clear => "clear",
        }
    }
}

/// Population of the wrong qubit state mixed into an averaged trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalMix {
    pub p_excited_thermal: f64,
}

impl ThermalMix {
    pub fn new(p_excited_thermal: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_excited_thermal) {
            return Err(Error::Config(format!(
                "thermal population must lie in [0, 1], got {p_excited_thermal}"
            )));
        }
        Ok(ThermalMix { p_excited_thermal })
    }

    /// Averaged field seen when preparing a state: (1−p)·own + p·other.
    pub fn mix(&self, own: Complex64, other: Complex64) -> Complex64 {
        (1.0 - self.p_excited_thermal) * own + self.p_excited_thermal * other
    }
}

/// Parse one `key=value` override.
pub fn parse_set_arg(arg: &str) -> Result<(String, f64)> {
    let (key, value) = arg
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{arg}'")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("--set has an empty key: '{arg}'")));
    }
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("--set {key}: bad numeric value ({e})")))?;
    Ok((key.to_string(), value))
}

/// A scenario invocation: which pipeline, on which device, written where.
#[derive(Debug, Clone)]
pub struct ScenarioRequest {
    pub kind: ScenarioKind,
    pub device: DeviceConfig,
    /// `--set` overrides applied on top of the scenario defaults.
    pub overrides: Vec<(String, f64)>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

/// Run a scenario end to end: resolve the device, merge settings, execute the
/// pipeline, and write the artifacts plus `manifest.json`.
pub fn run_scenario(req: &ScenarioRequest) -> Result<RunSummary> {
    let resolved = req.device.resolve()?;
    let settings = merge_settings(req.kind, &req.overrides)?;
    let config = RunConfigRecord {
        scenario: req.kind.name().to_string(),
        seed: req.seed,
        device: req.device.clone(),
        resolved: ResolvedConstants::from_device(&resolved),
        settings: settings.clone(),
    };
    let mut writer = OutputWriter::create(&req.out_dir, config)?;
    let ctx = scenarios::Context {
        params: resolved.params,
        settings: &settings,
        seed: req.seed,
    };
    match req.kind {
        ScenarioKind::DecaySweep => scenarios::decay_sweep(&ctx, &mut writer)?,
        ScenarioKind::PowerSweep => scenarios::power_sweep(&ctx, &mut writer)?,
        ScenarioKind::TrajectoryCompare => scenarios::trajectory_compare(&ctx, &mut writer)?,
        ScenarioKind::ClearVsSquare => scenarios::clear_vs_square(&ctx, &mut writer)?,
        ScenarioKind::ShortenedClear => scenarios::shortened_clear(&ctx, &mut writer)?,
        ScenarioKind::OptimizeRun => scenarios::optimize_run(&ctx, &mut writer)?,
        ScenarioKind::RamseySingle => scenarios::ramsey_single(&ctx, &mut writer)?,
    }
    writer.finish()
}

/// Settings for the standalone `simulate` pipeline.
pub const SIMULATE_DEFAULTS: &[(&str, f64)] = &[
    ("p_norm", 3.6),
    ("t_m1", 2.0),
    ("t_up", 0.15),
    ("t_dn", 0.15),
    ("tail", 0.3),
    ("sample_interval", 0.004),
    ("kerr", 1.0),
];

/// A standalone trajectory simulation: one pulse shape, one device, artifacts
/// plus manifest written like any scenario.
#[derive(Debug, Clone)]
pub struct SimulateRequest {
    pub shape: PulseShape,
    pub device: DeviceConfig,
    pub overrides: Vec<(String, f64)>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

/// Simulate one pulse and write `trajectory.csv` plus a summary.
pub fn run_simulate(req: &SimulateRequest) -> Result<RunSummary> {
    let resolved = req.device.resolve()?;
    let settings = merge_overrides("simulate", SIMULATE_DEFAULTS, &req.overrides)?;
    let config = RunConfigRecord {
        scenario: format!("simulate_{}", req.shape.name()),
        seed: req.seed,
        device: req.device.clone(),
        resolved: ResolvedConstants::from_device(&resolved),
        settings: settings.clone(),
    };
    let mut writer = OutputWriter::create(&req.out_dir, config)?;
    let ctx = scenarios::Context {
        params: resolved.params,
        settings: &settings,
        seed: req.seed,
    };
    scenarios::simulate(&ctx, req.shape, &mut writer)?;
    writer.finish()
}

/// Apply overrides to the scenario defaults, rejecting unknown keys by name.
pub fn merge_settings(
    kind: ScenarioKind,
    overrides: &[(String, f64)],
) -> Result<BTreeMap<String, f64>> {
    merge_overrides(kind.name(), kind.default_settings(), overrides)
}

/// Apply `key=value` overrides to a defaults table. Unknown keys are rejected
/// with an error naming the key and listing the known ones.
pub fn merge_overrides(
    context: &str,
    defaults: &[(&str, f64)],
    overrides: &[(String, f64)],
) -> Result<BTreeMap<String, f64>> {
    let mut merged: BTreeMap<String, f64> = defaults
        .iter()
        .map(|&(k, v)| (k.to_string(), v))
        .collect();
    for (key, value) in overrides {
        if !merged.contains_key(key) {
            let mut known: Vec<&str> = defaults.iter().map(|&(k, _)| k).collect();
            known.sort_unstable();
            return Err(Error::Config(format!(
                "unknown setting '{key}' for {context} (known settings: {})",
                known.join(", ")
            )));
        }
        if !value.is_finite() {
            return Err(Error::Config(format!(
                "setting '{key}' must be finite, got {value}"
            )));
        }
        merged.insert(key.clone(), *value);
    }
    Ok(merged)
}

/// Map a function over sweep points, in parallel when the `parallel` feature
/// is on. Results come back ordered by input index either way, so outputs
/// never depend on scheduling.
#[cfg(feature = "parallel")]
pub(crate) fn map_points<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(usize, &T) -> R + Sync,
) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_points<T, R>(items: &[T], f: impl Fn(usize, &T) -> R) -> Vec<R> {
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

//! Derivative-free empirical tuning of CLEAR segments against a simulated
//! measurement loop.
//!
//! [`MeasurementEmulator`] stands in for the experiment: it plays a candidate
//! pulse through the (optionally Kerr) cavity simulator for both qubit
//! preparations, reads the leftover photon number with a synthesized-and-fitted
//! Ramsey trace per branch, and scalarizes the two fitted n₀ values into one
//! objective. [`optimize_ringdown`] runs a downhill simplex over the two
//! ring-down amplitudes exactly as one would against hardware — every
//! evaluation, noise and all, is recorded.

use serde::{Deserialize, Serialize};

use crate::cavity::{simulate_branch, SimOptions};
use crate::design::ClearSpec;
use crate::device::{QubitState, SystemParams};
use crate::error::{Error, Result};
use crate::ramsey::{fit_ramsey, synthesize_trace, RamseyConfig};

/// Objective value reported when a candidate cannot be evaluated (infeasible
/// spec, diverging trajectory) or its Ramsey fit does not converge.
pub const OBJECTIVE_SENTINEL: f64 = 1e6;

/// Phase offset baked into every emulated Ramsey trace (an arbitrary fixed
/// instrument phase; the fit treats it as unknown).
pub const EMULATOR_PHI0: f64 = 0.3;

/// How the two per-branch n₀ values become one objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// max(n₀ᵍ, n₀ᵉ): reset must succeed regardless of the qubit state.
    Max,
    /// (n₀ᵍ + n₀ᵉ)/2.
    Mean,
}

impl ObjectiveKind {
    pub fn combine(self, n0_ground: f64, n0_excited: f64) -> f64 {
        match self {
            ObjectiveKind::Max => n0_ground.max(n0_excited),
            ObjectiveKind::Mean => 0.5 * (n0_ground + n0_excited),
        }
    }
}

/// Noise seeding across objective evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SeedPolicy {
    /// Every evaluation draws fresh noise, like a real experiment:
    /// trace seed = base + 2·evaluation_index + branch.
    Fresh { base: u64 },
    /// The same noise is replayed for every evaluation (branches still differ).
    Frozen { seed: u64 },
}

impl SeedPolicy {
    fn trace_seed(&self, eval_index: u64, branch: u64) -> u64 {
        match *self {
            SeedPolicy::Fresh { base } => base.wrapping_add(2 * eval_index).wrapping_add(branch),
            SeedPolicy::Frozen { seed } => seed.wrapping_add(branch),
        }
    }
}

/// One emulated measurement of a candidate pulse.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Evaluation {
    pub n0_ground: f64,
    pub n0_excited: f64,
    pub objective: f64,
    /// True when the candidate was infeasible or a branch fit failed to
    /// converge; `objective` is then [`OBJECTIVE_SENTINEL`].
    pub fit_failed: bool,
}

/// The simulated stand-in for the tune-up experiment.
#[derive(Debug, Clone)]
pub struct MeasurementEmulator {
    pub params: SystemParams,
    /// The pulse being tuned; candidates override selected fields.
    pub base: ClearSpec,
    pub kerr_enabled: bool,
    /// Ramsey acquisition used to read out the residual population
    /// (its `noise_sigma`/`rng_seed` are overridden per evaluation).
    pub ramsey: RamseyConfig,
    /// Std of the additive signal noise per synthesized trace.
    pub noise_sigma: f64,
    pub seed_policy: SeedPolicy,
    pub objective: ObjectiveKind,
}

impl MeasurementEmulator {
    /// Emulator with the standard Ramsey acquisition and the max objective.
    pub fn new(
        params: SystemParams,
        base: ClearSpec,
        kerr_enabled: bool,
        noise_sigma: f64,
        seed_policy: SeedPolicy,
    ) -> Self {
        MeasurementEmulator {
            ramsey: RamseyConfig::standard(&params, noise_sigma, 0),
            params,
            base,
            kerr_enabled,
            noise_sigma,
            seed_policy,
            objective: ObjectiveKind::Max,
        }
    }

    /// Measure a full candidate spec. `eval_index` feeds the seed policy so
    /// that repeated runs are reproducible evaluation by evaluation.
    pub fn evaluate_spec(&self, spec: &ClearSpec, eval_index: u64) -> Evaluation {
        let pulse = match spec.validate().and_then(|_| spec.envelope()) {
            Ok(p) => p,
            Err(_) => return Self::infeasible(),
        };
        let opts = SimOptions {
            kerr_enabled: self.kerr_enabled,
            // only the end-of-pulse amplitude is needed; boundaries are always sampled
            sample_interval: pulse.total_duration(),
            tail: 0.0,
            rk4_step: None,
        };
        let mut n0 = [0.0; 2];
        let mut fit_failed = false;
        for (branch, state) in QubitState::BOTH.into_iter().enumerate() {
            let traj = match simulate_branch(&self.params, &pulse, state, &opts) {
                Ok(t) => t,
                Err(_) => return Self::infeasible(),
            };
            let n_init = traj.final_photons();
            if !n_init.is_finite() || n_init > 1e4 {
                return Self::infeasible();
            }
            let mut cfg = self.ramsey.clone();
            cfg.noise_sigma = self.noise_sigma;
            cfg.rng_seed = self.seed_policy.trace_seed(eval_index, branch as u64);
            let fit = synthesize_trace(n_init, EMULATOR_PHI0, &self.params, &cfg)
                .and_then(|trace| fit_ramsey(&trace, &self.params));
            match fit {
                Ok(f) => {
                    n0[branch] = f.n0;
                    fit_failed |= !f.converged;
                }
                Err(_) => return Self::infeasible(),
            }
        }
        let objective = if fit_failed {
            OBJECTIVE_SENTINEL
        } else {
            self.objective.combine(n0[0], n0[1])
        };
        Evaluation {
            n0_ground: n0[0],
            n0_excited: n0[1],
            objective,
            fit_failed,
        }
    }

    /// Measure the base pulse with substituted ring-down amplitudes.
    pub fn evaluate_ringdown(&self, amp_dn1: f64, amp_dn2: f64, eval_index: u64) -> Evaluation {
        let mut spec = self.base;
        spec.amp_dn1 = amp_dn1;
        spec.amp_dn2 = amp_dn2;
        self.evaluate_spec(&spec, eval_index)
    }

    fn infeasible() -> Evaluation {
        Evaluation {
            n0_ground: OBJECTIVE_SENTINEL,
            n0_excited: OBJECTIVE_SENTINEL,
            objective: OBJECTIVE_SENTINEL,
            fit_failed: true,
        }
    }
}

/// Tunable fields of a [`ClearSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClearParam {
    AmpUp1,
    AmpUp2,
    AmpDn1,
    AmpDn2,
    TUp1,
    TUp2,
    TFlat,
    TDn1,
    TDn2,
}

impl ClearParam {
    pub const ALL: [ClearParam; 9] = [
        ClearParam::AmpUp1,
        ClearParam::AmpUp2,
        ClearParam::AmpDn1,
        ClearParam::AmpDn2,
        ClearParam::TUp1,
        ClearParam::TUp2,
        ClearParam::TFlat,
        ClearParam::TDn1,
        ClearParam::TDn2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClearParam::AmpUp1 => "amp_up1",
            ClearParam::AmpUp2 => "amp_up2",
            ClearParam::AmpDn1 => "amp_dn1",
            ClearParam::AmpDn2 => "amp_dn2",
            ClearParam::TUp1 => "t_up1",
            ClearParam::TUp2 => "t_up2",
            ClearParam::TFlat => "t_flat",
            ClearParam::TDn1 => "t_dn1",
            ClearParam::TDn2 => "t_dn2",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown pulse parameter '{name}' (expected one of: {})",
                    Self::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }

    pub fn get(self, spec: &ClearSpec) -> f64 {
        match self {
            ClearParam::AmpUp1 => spec.amp_up1,
            ClearParam::AmpUp2 => spec.amp_up2,
            ClearParam::AmpDn1 => spec.amp_dn1,
            ClearParam::AmpDn2 => spec.amp_dn2,
            ClearParam::TUp1 => spec.t_up1,
            ClearParam::TUp2 => spec.t_up2,
            ClearParam::TFlat => spec.t_flat,
            ClearParam::TDn1 => spec.t_dn1,
            ClearParam::TDn2 => spec.t_dn2,
        }
    }

    pub fn set(self, spec: &mut ClearSpec, value: f64) {
        match self {
            ClearParam::AmpUp1 => spec.amp_up1 = value,
            ClearParam::AmpUp2 => spec.amp_up2 = value,
            ClearParam::AmpDn1 => spec.amp_dn1 = value,
            ClearParam::AmpDn2 => spec.amp_dn2 = value,
            ClearParam::TUp1 => spec.t_up1 = value,
            ClearParam::TUp2 => spec.t_up2 = value,
            ClearParam::TFlat => spec.t_flat = value,
            ClearParam::TDn1 => spec.t_dn1 = value,
            ClearParam::TDn2 => spec.t_dn2 = value,
        }
    }
}

/// Simplex settings. One "iteration" is one objective evaluation, so
/// `max_iterations` caps the total measurement count; the initial simplex
/// (dim+1 evaluations) always runs in full.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimSettings {
    pub max_iterations: usize,
    /// Terminate once the simplex objective spread falls below this (photons).
    pub f_tol: f64,
}

impl Default for OptimSettings {
    fn default() -> Self {
        OptimSettings {
            max_iterations: 300,
            f_tol: 1e-3,
        }
    }
}

/// One recorded objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    /// Evaluation index, 0-based, in execution order.
    pub index: usize,
    /// Parameter values in the order they were named.
    pub params: Vec<f64>,
    pub n0_ground: f64,
    pub n0_excited: f64,
    pub objective: f64,
    pub fit_failed: bool,
}

/// A completed optimization: every evaluation plus the winner.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationRun {
    pub parameter_names: Vec<String>,
    pub settings: OptimSettings,
    pub seed_policy: SeedPolicy,
    pub history: Vec<TrialRecord>,
    /// The history entry with the lowest objective (earliest on ties).
    pub best: TrialRecord,
}

impl OptimizationRun {
    /// Write the history as CSV: `iter,<param...>,n0_g,n0_e,objective`.
    pub fn write_history_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "iter")?;
        for name in &self.parameter_names {
            write!(w, ",{name}")?;
        }
        writeln!(w, ",n0_g,n0_e,objective")?;
        for rec in &self.history {
            write!(w, "{}", rec.index)?;
            for p in &rec.params {
                write!(w, ",{p:.16e}")?;
            }
            writeln!(
                w,
                ",{:.16e},{:.16e},{:.16e}",
                rec.n0_ground, rec.n0_excited, rec.objective
            )?;
        }
        Ok(())
    }
}

/// Tune the two ring-down amplitudes. Equivalent to
/// `optimize_generic(emulator, &["amp_dn1", "amp_dn2"], ...)`.
pub fn optimize_ringdown(
    emulator: &MeasurementEmulator,
    initial: (f64, f64),
    settings: OptimSettings,
) -> Result<OptimizationRun> {
    optimize_generic(
        emulator,
        &["amp_dn1", "amp_dn2"],
        &[initial.0, initial.1],
        settings,
    )
}

/// Downhill simplex over 1–6 named [`ClearSpec`] fields.
///
/// Standard Nelder–Mead moves (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). The initial simplex perturbs each coordinate of the start by
/// ±20% (sign alternating by index; ±0.2 absolute for coordinates at zero).
/// Infeasible candidates (e.g. a duration driven negative) score
/// [`OBJECTIVE_SENTINEL`] and are walked away from rather than projected.
pub fn optimize_generic(
    emulator: &MeasurementEmulator,
    parameter_names: &[&str],
    initial: &[f64],
    settings: OptimSettings,
) -> Result<OptimizationRun> {
    if parameter_names.is_empty() || parameter_names.len() > 6 {
        return Err(Error::Argument(format!(
            "expected 1–6 parameters, got {}",
            parameter_names.len()
        )));
    }
    if parameter_names.len() != initial.len() {
        return Err(Error::Argument(format!(
            "{} parameter names but {} initial values",
            parameter_names.len(),
            initial.len()
        )));
    }
    if settings.max_iterations == 0 {
        return Err(Error::Argument("max_iterations must be ≥ 1".into()));
    }
    if !(settings.f_tol >= 0.0) {
        return Err(Error::Argument(format!(
            "f_tol must be non-negative, got {}",
            settings.f_tol
        )));
    }
    let params: Vec<ClearParam> = parameter_names
        .iter()
        .map(|n| ClearParam::parse(n))
        .collect::<Result<_>>()?;
    for (i, v) in initial.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Argument(format!(
                "initial value for {} must be finite, got {v}",
                parameter_names[i]
            )));
        }
    }

    let dim = params.len();
    let mut history: Vec<TrialRecord> = Vec::new();
    let evaluate = |x: &[f64], history: &mut Vec<TrialRecord>| -> f64 {
        let mut spec = emulator.base;
        for (p, &v) in params.iter().zip(x) {
            p.set(&mut spec, v);
        }
        let ev = emulator.evaluate_spec(&spec, history.len() as u64);
        history.push(TrialRecord {
            index: history.len(),
            params: x.to_vec(),
            n0_ground: ev.n0_ground,
            n0_excited: ev.n0_excited,
            objective: ev.objective,
            fit_failed: ev.fit_failed,
        });
        ev.objective
    };

    // Initial simplex: the start plus one perturbed vertex per coordinate.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let x0 = initial.to_vec();
    let f0 = evaluate(&x0, &mut history);
    simplex.push((x0.clone(), f0));
    for i in 0..dim {
        let mut xi = x0.clone();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        if xi[i].abs() > 1e-12 {
            xi[i] *= 1.0 + sign * 0.2;
        } else {
            xi[i] = sign * 0.2;
        }
        let fi = evaluate(&xi, &mut history);
        simplex.push((xi, fi));
    }

    let budget = settings.max_iterations;
    'optim: loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread < settings.f_tol || history.len() >= budget {
            break;
        }

        // centroid of all vertices but the worst
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }
        let worst = simplex[dim].clone();
        let lerp = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
            from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
        };

        // reflection
        let xr = lerp(&centroid, &worst.0, -1.0);
        if history.len() >= budget {
            break;
        }
        let fr = evaluate(&xr, &mut history);
        if fr < simplex[0].1 {
            // expansion
            if history.len() >= budget {
                simplex[dim] = (xr, fr);
                break;
            }
            let xe = lerp(&centroid, &xr, 2.0);
            let fe = evaluate(&xe, &mut history);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        // contraction: outside if the reflection improved on the worst, else inside
        let (xc_target, f_limit) = if fr < worst.1 {
            (xr.clone(), fr)
        } else {
            (worst.0.clone(), worst.1)
        };
        let xc = lerp(&centroid, &xc_target, 0.5);
        if history.len() >= budget {
            break;
        }
        let fc = evaluate(&xc, &mut history);
        if fc < f_limit {
            simplex[dim] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let xs = lerp(&best_x, &v.0, 0.5);
            if history.len() >= budget {
                break 'optim;
            }
            let fs = evaluate(&xs, &mut history);
            *v = (xs, fs);
        }
    }

    let best = history
        .iter()
        .min_by(|a, b| {
            a.objective
                .partial_cmp(&b.objective)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("history holds at least the initial simplex")
        .clone();
    Ok(OptimizationRun {
        parameter_names: parameter_names.iter().map(|s| s.to_string()).collect(),
        settings,
        seed_policy: emulator.seed_policy,
        history,
        best,
    })
}

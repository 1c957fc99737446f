//! The scenario pipelines. Each function takes the resolved device, the merged
//! settings, and the run seed, and writes its artifacts through the
//! [`OutputWriter`].
//!
//! Fitted populations always go through the full measurement chain — simulate
//! the pulse, synthesize a Ramsey trace (seeded per sweep point and branch),
//! fit it — so the tables show what the experiment would report, next to the
//! model truths where those exist in closed form.

use std::collections::BTreeMap;
use std::io::Write as _;

use serde::Serialize;

use super::{map_points, OutputWriter, ThermalMix};
use crate::cavity::{
    calibrate_drive, simulate_pulse, steady_state_kerr, SimOptions, Trajectory,
};
use crate::design::{make_square_pulse, ClearSpec};
use crate::device::{QubitState, SystemParams};
use crate::error::{Error, Result};
use crate::optim::{
    optimize_ringdown, MeasurementEmulator, OptimSettings, SeedPolicy, EMULATOR_PHI0,
};
use crate::ramsey::{
    fit_exponential_decay, fit_ramsey, synthesize_trace, ExpDecayFit, FitResult, RamseyConfig,
    DECAY_FIT_FLOOR,
};

/// The ten-point drive-power grid used by the sweep scenarios when `p_count`
/// is left at 0.
pub const DEFAULT_POWER_GRID: [f64; 10] = [0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0];

/// Everything a scenario body needs.
pub(super) struct Context<'a> {
    pub params: SystemParams,
    pub settings: &'a BTreeMap<String, f64>,
    pub seed: u64,
}

impl Context<'_> {
    /// Look up a setting that the defaults table guarantees to exist.
    fn need(&self, key: &str) -> f64 {
        *self
            .settings
            .get(key)
            .unwrap_or_else(|| panic!("setting '{key}' missing from merged defaults"))
    }

    fn kerr_enabled(&self) -> bool {
        self.need("kerr") != 0.0
    }

    /// Noise seed for sweep point `index`, qubit branch `branch`.
    fn trace_seed(&self, index: usize, branch: usize) -> u64 {
        self.seed
            .wrapping_add(2 * index as u64)
            .wrapping_add(branch as u64)
    }

    /// CLEAR durations from `t_m1`/`t_up`/`t_dn`: the ring-up plus flat span
    /// fills the measurement window, the ring-down extends past it.
    fn clear_durations(&self) -> Result<(f64, f64, f64)> {
        let t_up = self.need("t_up");
        let t_dn = self.need("t_dn");
        let t_flat = self.need("t_m1") - 2.0 * t_up;
        if !(t_flat > 0.0) {
            return Err(Error::Config(format!(
                "t_m1 = {} leaves no flat span after two {t_up} µs ring-up segments",
                self.need("t_m1")
            )));
        }
        Ok((t_up, t_flat, t_dn))
    }
}

/// The power grid: preset when `p_count` = 0, else `p_count` geometric points
/// from `p_min` to `p_max`.
fn power_grid(ctx: &Context) -> Result<Vec<f64>> {
    let count = ctx.need("p_count").round();
    if count == 0.0 {
        return Ok(DEFAULT_POWER_GRID.to_vec());
    }
    if count < 2.0 {
        return Err(Error::Config(format!(
            "p_count must be 0 (preset grid) or ≥ 2, got {count}"
        )));
    }
    let p_min = ctx.need("p_min");
    let p_max = ctx.need("p_max");
    if !(p_min > 0.0) || !(p_max >= p_min) {
        return Err(Error::Config(format!(
            "power range must satisfy 0 < p_min ≤ p_max, got [{p_min}, {p_max}]"
        )));
    }
    let n = count as usize;
    Ok((0..n)
        .map(|i| p_min * (p_max / p_min).powf(i as f64 / (n - 1) as f64))
        .collect())
}

/// Simulate `pulse`, then read the end-of-pulse population of each branch
/// through a synthesized-and-fitted Ramsey trace.
fn fitted_populations(
    ctx: &Context,
    pulse: &crate::pulse::PulseEnvelope,
    kerr_enabled: bool,
    noise_sigma: f64,
    point_index: usize,
) -> Result<([f64; 2], [f64; 2])> {
    let opts = SimOptions {
        kerr_enabled,
        sample_interval: pulse.total_duration(),
        tail: 0.0,
        rk4_step: None,
    };
    let traj = simulate_pulse(&ctx.params, pulse, &opts)?;
    let mut n_sim = [0.0; 2];
    let mut n_fit = [0.0; 2];
    for (branch, state) in QubitState::BOTH.into_iter().enumerate() {
        n_sim[branch] = traj.final_photons(state);
        n_fit[branch] = fit_population(ctx, n_sim[branch], noise_sigma, point_index, branch)?;
    }
    Ok((n_sim, n_fit))
}

/// Synthesize one Ramsey trace for a known population and fit it back.
fn fit_population(
    ctx: &Context,
    n_init: f64,
    noise_sigma: f64,
    point_index: usize,
    branch: usize,
) -> Result<f64> {
    let cfg = RamseyConfig {
        noise_sigma,
        rng_seed: ctx.trace_seed(point_index, branch),
        ..RamseyConfig::standard(&ctx.params, 0.0, 0)
    };
    let trace = synthesize_trace(n_init, EMULATOR_PHI0, &ctx.params, &cfg)?;
    Ok(fit_ramsey(&trace, &ctx.params)?.n0)
}

/// An exponential-decay fit that may be skipped (e.g. every point below the
/// fit floor) without failing the whole run.
#[derive(Debug, Serialize)]
struct MaybeDecayFit {
    fit: Option<ExpDecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
}

fn maybe_decay_fit(points: &[(f64, f64)]) -> MaybeDecayFit {
    match fit_exponential_decay(points, DECAY_FIT_FLOOR) {
        Ok(fit) => MaybeDecayFit {
            fit: Some(fit),
            skipped: None,
        },
        Err(e) => MaybeDecayFit {
            fit: None,
            skipped: Some(e.to_string()),
        },
    }
}

/// Residual population vs wait time after a square readout pulse, with an
/// exponential fit per qubit branch. Artifacts: `decay_sweep.csv`,
/// `decay_fit.json`.
pub(super) fn decay_sweep(ctx: &Context, w: &mut OutputWriter) -> Result<()> {
    let p_norm = ctx.need("p_norm");
    let t_m1 = ctx.need("t_m1");
    let noise_sigma = ctx.need("noise_sigma");
    let t_points = ctx.need("t_points").round();
    if t_points < 2.0 {
        return Err(Error::Config(format!(
            "t_points must be ≥ 2, got {t_points}"
        )));
    }
    let t_max = ctx.need("t_relax_max");
    if !(t_max > 0.0) {
        return Err(Error::Config(format!(
            "t_relax_max must be positive, got {t_max}"
        )));
    }
    let n_pts = t_points as usize;
    let grid: Vec<f64> = (0..n_pts)
        .map(|i| i as f64 * t_max / (n_pts - 1) as f64)
        .collect();
    let eps = calibrate_drive(&ctx.params).eps_for_power(p_norm)?;

    struct Row {
        t_relax: f64,
        n_fit: [f64; 2],
        n_model: f64,
    }
    let rows: Vec<Row> = map_points(&grid, |i, &t_relax| -> Result<Row> {
        // the wait rides along as a zero-amplitude tail on the pulse
        let pulse = make_square_pulse(eps, t_m1, t_relax)?;
        let (_, n_fit) = fitted_populations(ctx, &pulse, false, noise_sigma, i)?;
        Ok(Row {
            t_relax,
            n_fit,
            n_model: p_norm * (-ctx.params.kappa * t_relax).exp(),
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    w.write_csv("decay_sweep.csv", |b| {
        writeln!(b, "t_relax_us,n0_fit_g,n0_fit_e,n0_model")?;
        for r in &rows {
            writeln!(
                b,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t_relax, r.n_fit[0], r.n_fit[1], r.n_model
            )?;
        }
        Ok(())
    })?;

    #[derive(Serialize)]
    struct DecayFits {
        ground: MaybeDecayFit,
        excited: MaybeDecayFit,
        expected_rate_per_us: f64,
        expected_amplitude: f64,
        floor: f64,
    }
    let branch_points = |b: usize| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.t_relax, r.n_fit[b])).collect()
    };
    w.write_json(
        "decay_fit.json",
        &DecayFits {
            ground: maybe_decay_fit(&branch_points(0)),
            excited: maybe_decay_fit(&branch_points(1)),
            expected_rate_per_us: ctx.params.kappa,
            expected_amplitude: p_norm,
            floor: DECAY_FIT_FLOOR,
        },
    )
}

/// Residual population vs drive power at a fixed wait, against the linear
/// reference and the per-branch Kerr steady-state curves. Artifact:
/// `power_sweep.csv`.
pub(super) fn power_sweep(ctx: &Context, w: &mut OutputWriter) -> Result<()> {
    let t_relax = ctx.need("t_relax");
    if !(t_relax >= 0.0) {
        return Err(Error::Config(format!(
            "t_relax must be non-negative, got {t_relax}"
        )));
    }
    let noise_sigma = ctx.need("noise_sigma");
    let kerr_on = ctx.kerr_enabled();
    let grid = power_grid(ctx)?;
    let cal = calibrate_drive(&ctx.params);
    let decay = (-ctx.params.kappa * t_relax).exp();

    struct Row {
        p_norm: f64,
        n_fit: [f64; 2],
        n_model: [f64; 2],
        bistable: [bool; 2],
        n_linear_ref: f64,
    }
    let rows: Vec<Row> = map_points(&grid, |i, &p| -> Result<Row> {
        let eps = cal.eps_for_power(p)?;
        let mut n_fit = [0.0; 2];
        let mut n_model = [0.0; 2];
        let mut bistable = [false; 2];
        for (branch, state) in QubitState::BOTH.into_iter().enumerate() {
            let steady = if kerr_on {
                steady_state_kerr(&ctx.params, eps, state)
            } else {
                crate::cavity::KerrSteadyState {
                    n: p,
                    bistable: false,
                }
            };
            bistable[branch] = steady.bistable;
            n_model[branch] = steady.n * decay;
            n_fit[branch] = fit_population(ctx, n_model[branch], noise_sigma, i, branch)?;
        }
        Ok(Row {
            p_norm: p,
            n_fit,
            n_model,
            bistable,
            n_linear_ref: p * decay,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    w.write_csv("power_sweep.csv", |b| {
        writeln!(
            b,
            "p_norm,n0_fit_g,n0_fit_e,n_model_g,n_model_e,n_linear_ref,bistable_g,bistable_e"
        )?;
        for r in &rows {
            writeln!(
                b,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                r.p_norm,
                r.n_fit[0],
                r.n_fit[1],
                r.n_model[0],
                r.n_model[1],
                r.n_linear_ref,
                u8::from(r.bistable[0]),
                u8::from(r.bistable[1])
            )?;
        }
        Ok(())
    })
}

/// Phase-space trajectories of a square pulse vs the CLEAR pulse, averaged
/// over the thermal qubit population. Artifacts: `square_trajectory.csv`,
/// `clear_trajectory.csv`, `trajectory_summary.json`.
pub(super) fn trajectory_compare(ctx: &Context, w: &mut OutputWriter) -> Result<()> {
    let p_norm = ctx.need("p_norm");
    let mix = ThermalMix::new(ctx.need("p_thermal"))?;
    let sample_interval = ctx.need("sample_interval");
    let (t_up, t_flat, t_dn) = ctx.clear_durations()?;
    let eps = calibrate_drive(&ctx.params).eps_for_power(p_norm)?;
    let spec = ClearSpec::solved(&ctx.params, eps, t_up, t_up, t_flat, t_dn, t_dn)?;

    let opts = SimOptions {
        kerr_enabled: ctx.kerr_enabled(),
        sample_interval,
        tail: 0.0,
        rk4_step: None,
    };
    // the square pulse gets a drive-off tail as long as the CLEAR ring-down,
    // so both tables cover the same span past the measurement window
    let square = make_square_pulse(eps, ctx.need("t_m1"), spec.ring_down_duration())?;
    let traj_square = mixed(&simulate_pulse(&ctx.params, &square, &opts)?, &mix);
    let traj_clear = mixed(
        &simulate_pulse(&ctx.params, &spec.envelope()?, &opts)?,
        &mix,
    );

    w.write_csv("square_trajectory.csv", |b| traj_square.write_csv(b))?;
    w.write_csv("clear_trajectory.csv", |b| traj_clear.write_csv(b))?;

    #[derive(Serialize)]
    struct Summary {
        p_thermal: f64,
        spec: ClearSpec,
        square_final_n_g: f64,
        square_final_n_e: f64,
        clear_final_n_g: f64,
        clear_final_n_e: f64,
    }
    w.write_json(
        "trajectory_summary.json",
        &Summary {
            p_thermal: mix.p_excited_thermal,
            spec,
            square_final_n_g: traj_square.final_photons(QubitState::Ground),
            square_final_n_e: traj_square.final_photons(QubitState::Excited),
            clear_final_n_g: traj_clear.final_photons(QubitState::Ground),
            clear_final_n_e: traj_clear.final_photons(QubitState::Excited),
        },
    )
}

/// Average each branch trajectory with the thermally occupied other branch.
fn mixed(traj: &Trajectory, mix: &ThermalMix) -> Trajectory {
    let n = traj.times.len();
    let mut ground = Vec::with_capacity(n);
    let mut excited = Vec::with_capacity(n);
    for i in 0..n {
        ground.push(mix.mix(traj.ground[i], traj.excited[i]));
        excited.push(mix.mix(traj.excited[i], traj.ground[i]));
    }
    Trajectory {
        times: traj.times.clone(),
        ground,
        excited,
    }
}

/// Residual population vs power for the CLEAR pulse (read out immediately)
/// against a square pulse followed by a wait as long as the CLEAR ring-down.
/// Artifacts: `clear_vs_square.csv`, `clear_vs_square_summary.json`.
pub(super) fn clear_vs_square(ctx: &Context, w: &mut OutputWriter) -> Result<()> {
    let noise_sigma = ctx.need("noise_sigma");
    let kerr_on = ctx.kerr_enabled();
    let t_m1 = ctx.need("t_m1");
    let (t_up, t_flat, t_dn) = ctx.clear_durations()?;
    let grid = power_grid(ctx)?;
    let cal = calibrate_drive(&ctx.params);

    struct Row {
        p_norm: f64,
        // [shape = clear|square][branch]
        n_sim: [[f64; 2]; 2],
        n_fit: [[f64; 2]; 2],
    }
    let rows: Vec<Row> = map_points(&grid, |i, &p| -> Result<Row> {
        let eps = cal.eps_for_power(p)?;
        let spec = ClearSpec::solved(&ctx.params, eps, t_up, t_up, t_flat, t_dn, t_dn)?;
        // two traces per shape per point; keep the seed streams disjoint
        let (clear_sim, clear_fit) =
            fitted_populations(ctx, &spec.envelope()?, kerr_on, noise_sigma, 2 * i)?;
        let square = make_square_pulse(eps, t_m1, spec.ring_down_duration())?;
        let (square_sim, square_fit) =
            fitted_populations(ctx, &square, kerr_on, noise_sigma, 2 * i + 1)?;
        Ok(Row {
            p_norm: p,
            n_sim: [clear_sim, square_sim],
            n_fit: [clear_fit, square_fit],
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    w.write_csv("clear_vs_square.csv", |b| {
        writeln!(b, "p_norm,shape,state,n_sim,n0_fit")?;
        for r in &rows {
            for (s, shape) in ["clear", "square"].into_iter().enumerate() {
                for (branch, state) in QubitState::BOTH.into_iter().enumerate() {
                    writeln!(
                        b,
                        "{:.16e},{shape},{},{:.16e},{:.16e}",
                        r.p_norm,
                        state.label(),
                        r.n_sim[s][branch],
                        r.n_fit[s][branch]
                    )?;
                }
            }
        }
        Ok(())
    })?;

    // How much longer the square pulse would need to idle to match CLEAR:
    // both shapes were read out after the same ring-down span, and a passive
    // cavity loses photons at exactly κ, so Δt = ln(n_square/n_clear)/κ.
    #[derive(Serialize)]
    struct SpeedupRow {
        p_norm: f64,
        speedup_us_g: Option<f64>,
        speedup_us_e: Option<f64>,
    }
    #[derive(Serialize)]
    struct Summary {
        ring_down_us: f64,
        two_t_cav_us: f64,
        speedups: Vec<SpeedupRow>,
    }
    let speedup = |n_square: f64, n_clear: f64| -> Option<f64> {
        (n_clear > 0.0 && n_square > n_clear).then(|| (n_square / n_clear).ln() / ctx.params.kappa)
    };
    w.write_json(
        "clear_vs_square_summary.json",
        &Summary {
            ring_down_us: 2.0 * t_dn,
            two_t_cav_us: 2.0 / ctx.params.kappa,
            speedups: rows
                .iter()
                .map(|r| SpeedupRow {
                    p_norm: r.p_norm,
                    speedup_us_g: speedup(r.n_fit[1][0], r.n_fit[0][0]),
                    speedup_us_e: speedup(r.n_fit[1][1], r.n_fit[0][1]),
                })
                .collect(),
        },
    )
}

/// The CLEAR pulse with shortened ring-down segments across the power sweep.
/// Artifact: `shortened_clear.csv`.
pub(super) fn shortened_clear(ctx: &Context, w: &mut OutputWriter) -> Result<()> {
    let noise_sigma = ctx.need("noise_sigma");
    let kerr_on = ctx.kerr_enabled();
    let (t_up, t_flat, t_dn) = ctx.clear_durations()?;
    let grid = power_grid(ctx)?;
    let cal = calibrate_drive(&ctx.params);

    struct Row {
        p_norm: f64,
        n_sim: [f64; 2],
        n_fit: [f64; 2],
    }
    let rows: Vec<Row> = map_points(&grid, |i, &p| -> Result<Row> {
        let eps = cal.eps_for_power(p)?;
        let spec = ClearSpec::solved(&ctx.params, eps, t_up, t_up, t_flat, t_dn, t_dn)?;
        let (n_sim, n_fit) = fitted_populations(ctx, &spec.envelope()?, kerr_on, noise_sigma, i)?;
        Ok(Row {
            p_norm: p,
            n_sim,
            n_fit,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    w.write_csv("shortened_clear.csv", |b| {
        writeln!(b, "p_norm,n_sim_g,n_sim_e,n0_fit_g,n0_fit_e")?;
        for r in &rows {
            writeln!(
                b,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.p_norm, r.n_sim[0], r.n_sim[1], r.n_fit[0], r.n_fit[1]
            )?;
        }
        Ok(())
    })
}

/// Fitted populations of a spec's end-of-pulse state, with the two Ramsey
/// traces written out as `{prefix}_{g,e}.csv` (same format `ramsey-fit` reads).
#[derive(Debug, Clone, Copy, Serialize)]
struct ReadoutPair {
    n_sim_g: f64,
    n_sim_e: f64,
    n0_fit_g: f64,
    n0_fit_e: f64,
    converged: bool,
}

fn readout_pair(
    ctx: &Context,
    spec: &ClearSpec,
    noise_sigma: f64,
    seed_base: u64,
    prefix: &str,
    w: &mut OutputWriter,
) -> Result<ReadoutPair> {
    let pulse = spec.envelope()?;
    let opts = SimOptions {
        kerr_enabled: ctx.kerr_enabled(),
        sample_interval: pulse.total_duration(),
        tail: 0.0,
        rk4_step: None,
    };
    let traj = simulate_pulse(&ctx.params, &pulse, &opts)?;
    let mut n_sim = [0.0; 2];
    let mut fits: [Option<FitResult>; 2] = [None, None];
    for (branch, state) in QubitState::BOTH.into_iter().enumerate() {
        n_sim[branch] = traj.final_photons(state);
        let cfg = RamseyConfig {
            noise_sigma,
            rng_seed: seed_base.wrapping_add(branch as u64),
            ..RamseyConfig::standard(&ctx.params, 0.0, 0)
        };
        let trace = synthesize_trace(n_sim[branch], EMULATOR_PHI0, &ctx.params, &cfg)?;
        w.write_csv(&format!("{prefix}_{}.csv", state.label()), |b| {
            trace.write_csv(b)
        })?;
        fits[branch] = Some(fit_ramsey(&trace, &ctx.params)?);
    }
    let (g, e) = (fits[0].unwrap(), fits[1].unwrap());
    Ok(ReadoutPair {
        n_sim_g: n_sim[0],
        n_sim_e: n_sim[1],
        n0_fit_g: g.n0,
        n0_fit_e: e.n0,
        converged: g.converged && e.converged,
    })
}

/// Empirical ring-down tuning on the simulated measurement loop: start from
/// the linear design, let the simplex adjust the two ring-down amplitudes
/// against noisy Ramsey readouts. Artifacts: `history.csv`, before/after
/// Ramsey traces, `optimized_spec.json`, `optimize_summary.json`.
pub(super) fn optimize_run(ctx: &Context, w: &mut OutputWriter) -> Result<()> {
    let p_norm = ctx.need("p_norm");
    let noise_sigma = ctx.need("noise_sigma");
    let (t_up, t_flat, t_dn) = ctx.clear_durations()?;
    let max_iterations = ctx.need("max_iterations").round();
    if max_iterations < 1.0 {
        return Err(Error::Config(format!(
            "max_iterations must be ≥ 1, got {max_iterations}"
        )));
    }
    let settings = OptimSettings {
        max_iterations: max_iterations as usize,
        f_tol: ctx.need("f_tol"),
    };

    let eps = calibrate_drive(&ctx.params).eps_for_power(p_norm)?;
    let base = ClearSpec::solved(&ctx.params, eps, t_up, t_up, t_flat, t_dn, t_dn)?;
    let before = readout_pair(
        ctx,
        &base,
        noise_sigma,
        ctx.seed.wrapping_add(1_000_000),
        "ramsey_before",
        w,
    )?;

    let emulator = MeasurementEmulator::new(
        ctx.params,
        base,
        ctx.kerr_enabled(),
        noise_sigma,
        SeedPolicy::Fresh { base: ctx.seed },
    );
    let run = optimize_ringdown(&emulator, (base.amp_dn1, base.amp_dn2), settings)?;

    let mut optimized = base;
    optimized.amp_dn1 = run.best.params[0];
    optimized.amp_dn2 = run.best.params[1];
    let after = readout_pair(
        ctx,
        &optimized,
        noise_sigma,
        ctx.seed.wrapping_add(2_000_000),
        "ramsey_after",
        w,
    )?;

    w.write_csv("history.csv", |b| run.write_history_csv(b))?;

    #[derive(Serialize)]
    struct SpecReport<'a> {
        initial: &'a ClearSpec,
        optimized: &'a ClearSpec,
        best: &'a crate::optim::TrialRecord,
        evaluations: usize,
    }
    w.write_json(
        "optimized_spec.json",
        &SpecReport {
            initial: &base,
            optimized: &optimized,
            best: &run.best,
            evaluations: run.history.len(),
        },
    )?;

    #[derive(Serialize)]
    struct Summary {
        before: ReadoutPair,
        after: ReadoutPair,
        best_objective: f64,
        evaluations: usize,
    }
    w.write_json(
        "optimize_summary.json",
        &Summary {
            before,
            after,
            best_objective: run.best.objective,
            evaluations: run.history.len(),
        },
    )
}

/// Standalone trajectory simulation of one pulse shape. Artifacts:
/// `trajectory.csv`, `simulate_summary.json`.
pub(super) fn simulate(
    ctx: &Context,
    shape: super::PulseShape,
    w: &mut OutputWriter,
) -> Result<()> {
    let eps = calibrate_drive(&ctx.params).eps_for_power(ctx.need("p_norm"))?;
    let pulse = match shape {
        super::PulseShape::Square => make_square_pulse(eps, ctx.need("t_m1"), 0.0)?,
        super::PulseShape::Clear => {
            let (t_up, t_flat, t_dn) = ctx.clear_durations()?;
            ClearSpec::solved(&ctx.params, eps, t_up, t_up, t_flat, t_dn, t_dn)?.envelope()?
        }
    };
    let opts = SimOptions {
        kerr_enabled: ctx.kerr_enabled(),
        sample_interval: ctx.need("sample_interval"),
        tail: ctx.need("tail"),
        rk4_step: None,
    };
    let traj = simulate_pulse(&ctx.params, &pulse, &opts)?;
    w.write_csv("trajectory.csv", |b| traj.write_csv(b))?;

    #[derive(Serialize)]
    struct Summary {
        shape: &'static str,
        pulse_total_us: f64,
        tail_us: f64,
        final_n_g: f64,
        final_n_e: f64,
        max_n_g: f64,
        max_n_e: f64,
    }
    w.write_json(
        "simulate_summary.json",
        &Summary {
            shape: shape.name(),
            pulse_total_us: pulse.total_duration(),
            tail_us: opts.tail,
            final_n_g: traj.final_photons(QubitState::Ground),
            final_n_e: traj.final_photons(QubitState::Excited),
            max_n_g: traj.max_photons(QubitState::Ground),
            max_n_e: traj.max_photons(QubitState::Excited),
        },
    )
}

/// One synthesized Ramsey trace and its fit. Artifacts: `ramsey_trace.csv`,
/// `ramsey_fit.json`.
pub(super) fn ramsey_single(ctx: &Context, w: &mut OutputWriter) -> Result<()> {
    let n0 = ctx.need("n0");
    if !(n0 >= 0.0) {
        return Err(Error::Config(format!("n0 must be non-negative, got {n0}")));
    }
    let phi0 = ctx.need("phi0");
    let cfg = RamseyConfig {
        detuning: crate::units::mhz(ctx.need("detuning_mhz")),
        noise_sigma: ctx.need("noise_sigma"),
        rng_seed: ctx.seed,
        ..RamseyConfig::standard(&ctx.params, 0.0, 0)
    };
    let trace = synthesize_trace(n0, phi0, &ctx.params, &cfg)?;
    w.write_csv("ramsey_trace.csv", |b| trace.write_csv(b))?;
    let fit = fit_ramsey(&trace, &ctx.params)?;

    #[derive(Serialize)]
    struct Truth {
        n0: f64,
        phi0: f64,
    }
    #[derive(Serialize)]
    struct Report {
        truth: Truth,
        fit: FitResult,
    }
    w.write_json(
        "ramsey_fit.json",
        &Report {
            truth: Truth { n0, phi0 },
            fit,
        },
    )
}

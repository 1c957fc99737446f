//! The demo's three operations as plain JSON-string calls.
//!
//! Everything here is ordinary Rust so the crate builds and tests on the host;
//! the wasm-bindgen wrappers in `lib.rs` only exist on the wasm32 target. All
//! inputs use lab units (MHz, ns); replies carry µs/photon-number series ready
//! to plot.

use clearkit::cavity::{calibrate_drive, simulate_pulse, SimOptions};
use clearkit::design::ClearSpec;
use clearkit::device::{DeviceConfig, QubitState, SystemParams};
use clearkit::optim::{optimize_ringdown, MeasurementEmulator, OptimSettings, SeedPolicy};
use clearkit::ramsey::{fit_ramsey, ramsey_model, synthesize_trace, RamseyConfig};
use clearkit::units;
use clearkit::{Error, Result};
use serde_json::json;

/// The built-in demo device as a config-file JSON string (the page's default).
pub fn demo_device_json() -> String {
    serde_json::to_string_pretty(&DeviceConfig::demo()).expect("demo device serializes")
}

/// Parse a device config; an empty or all-whitespace string means the demo device.
fn parse_device(device_json: &str) -> Result<SystemParams> {
    let config = if device_json.trim().is_empty() {
        DeviceConfig::demo()
    } else {
        serde_json::from_str(device_json)
            .map_err(|e| Error::Config(format!("device JSON: {e}")))?
    };
    Ok(config.resolve()?.params)
}

/// Solve a CLEAR pulse for the requested power and segment durations, then
/// simulate both qubit branches through the pulse and a free ring-down tail.
/// Returns the solved spec, the reset residuals, and plottable series.
pub fn design_and_simulate(
    device_json: &str,
    p_norm: f64,
    t_up_ns: f64,
    t_flat_ns: f64,
    t_dn_ns: f64,
    kerr_on: bool,
) -> Result<String> {
    let params = parse_device(device_json)?;
    let eps = calibrate_drive(&params).eps_for_power(p_norm)?;
    let (t_up, t_flat, t_dn) = (units::ns(t_up_ns), units::ns(t_flat_ns), units::ns(t_dn_ns));
    let spec = ClearSpec::solved(&params, eps, t_up, t_up, t_flat, t_dn, t_dn)?;
    let pulse = spec.envelope()?;

    let total = pulse.total_duration();
    let opts = SimOptions {
        kerr_enabled: kerr_on,
        sample_interval: (total / 400.0).max(1e-3),
        tail: 0.3,
        rk4_step: None,
    };
    let traj = simulate_pulse(&params, &pulse, &opts)?;
    let envelope: Vec<f64> = traj
        .times
        .iter()
        .map(|&t| pulse.amplitude_at(t).re / eps)
        .collect();
    let n_g: Vec<f64> = traj.ground.iter().map(|a| a.norm_sqr()).collect();
    let n_e: Vec<f64> = traj.excited.iter().map(|a| a.norm_sqr()).collect();

    let reply = json!({
        "spec": spec,
        "pulse_total_us": total,
        "residual_ground": traj.final_alpha(QubitState::Ground).norm(),
        "residual_excited": traj.final_alpha(QubitState::Excited).norm(),
        "trajectory": {
            "t_us": traj.times,
            "n_g": n_g,
            "n_e": n_e,
            "drive": envelope,
        },
    });
    Ok(reply.to_string())
}

/// Synthesize one noisy Ramsey trace for a known residual population and fit
/// it back. Returns the samples, the fitted model curve, and both parameter sets.
pub fn ramsey_probe(
    device_json: &str,
    n0: f64,
    phi0: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<String> {
    if !(n0 >= 0.0) || !n0.is_finite() {
        return Err(Error::Argument(format!(
            "n0 must be non-negative, got {n0}"
        )));
    }
    let params = parse_device(device_json)?;
    let cfg = RamseyConfig::standard(&params, noise_sigma, seed);
    let trace = synthesize_trace(n0, phi0, &params, &cfg)?;
    let fit = fit_ramsey(&trace, &params)?;
    let fitted_curve = ramsey_model(fit.n0, fit.phi0, &params, &cfg);

    let reply = json!({
        "truth": { "n0": n0, "phi0": phi0 },
        "fit": fit,
        "t_r_us": trace.t_r,
        "signal": trace.signal,
        "fitted": fitted_curve,
    });
    Ok(reply.to_string())
}

/// Run the simplex ring-down tuner against the noisy Kerr measurement
/// emulator, starting from the linear-model solution. Returns the objective
/// history plus noiseless before/after readings of both branches.
pub fn tune_ringdown(
    device_json: &str,
    p_norm: f64,
    t_dn_ns: f64,
    budget: u32,
    noise_sigma: f64,
    seed: u64,
) -> Result<String> {
    let params = parse_device(device_json)?;
    let eps = calibrate_drive(&params).eps_for_power(p_norm)?;
    let t_dn = units::ns(t_dn_ns);
    let base = ClearSpec::solved(&params, eps, 0.15, 0.15, 1.7, t_dn, t_dn)?;

    let emulator = MeasurementEmulator::new(
        params,
        base,
        true,
        noise_sigma,
        SeedPolicy::Fresh { base: seed },
    );
    let run = optimize_ringdown(
        &emulator,
        (base.amp_dn1, base.amp_dn2),
        OptimSettings {
            max_iterations: budget.max(1) as usize,
            f_tol: 1e-3,
        },
    )?;
    let mut tuned = base;
    tuned.amp_dn1 = run.best.params[0];
    tuned.amp_dn2 = run.best.params[1];

    // Judge the initial and tuned pulses without measurement noise so the
    // page can show the true improvement next to what the optimizer saw.
    let referee =
        MeasurementEmulator::new(params, base, true, 0.0, SeedPolicy::Frozen { seed: 0 });
    let before = referee.evaluate_spec(&base, 0);
    let after = referee.evaluate_spec(&tuned, 0);

    let objective: Vec<f64> = run.history.iter().map(|r| r.objective).collect();
    let best_so_far: Vec<f64> = objective
        .iter()
        .scan(f64::INFINITY, |acc, &x| {
            *acc = acc.min(x);
            Some(*acc)
        })
        .collect();

    let reply = json!({
        "initial": base,
        "tuned": tuned,
        "best": run.best,
        "evaluations": run.history.len(),
        "objective": objective,
        "best_so_far": best_so_far,
        "before": { "n0_ground": before.n0_ground, "n0_excited": before.n0_excited },
        "after": { "n0_ground": after.n0_ground, "n0_excited": after.n0_excited },
    });
    Ok(reply.to_string())
}

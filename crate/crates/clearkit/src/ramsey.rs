//! Transient Ramsey interferometry against a decaying cavity population.
//!
//! While n photons remain in the readout cavity, the qubit is Stark-shifted by
//! 2χn, so a Ramsey fringe acquired right after a reset pulse carries a
//! time-dependent phase from the decaying photon population:
//!
//! ```text
//! S(t_R) = ½·[1 − Im exp(−(Γ₂ + iΔ)t_R + i(φ₀ − 2n₀χ·τ(t_R)))]
//! τ(t_R) = (1 − e^{−(κ + 2iχ)t_R}) / (κ + 2iχ)
//! ```
//!
//! With κ, χ, Γ₂ and the deliberate Ramsey detuning Δ known independently, the
//! only free parameters are the initial photon number n₀ and a phase offset φ₀,
//! which [`fit_ramsey`] extracts by damped Gauss-Newton least squares.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::device::SystemParams;
use crate::error::{Error, Result};

/// Acquisition settings for a transient Ramsey trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RamseyConfig {
    /// Deliberate Ramsey detuning Δ (rad/µs).
    pub detuning: f64,
    /// Qubit dephasing rate Γ₂ (1/µs), thermal background folded in.
    pub gamma2: f64,
    /// Ramsey delays t_R (µs), strictly increasing, starting at ≥ 0.
    pub t_r_grid: Vec<f64>,
    /// Std of additive Gaussian signal noise (signal units).
    pub noise_sigma: f64,
    /// Seed for the synthetic-noise generator.
    pub rng_seed: u64,
}

impl RamseyConfig {
    /// The default acquisition: 61 delays from 0 to 600 ns (10 ns spacing) and
    /// a 10 MHz Ramsey detuning.
    pub fn standard(params: &SystemParams, noise_sigma: f64, rng_seed: u64) -> Self {
        RamseyConfig {
            detuning: crate::units::mhz(10.0),
            gamma2: params.gamma2(),
            t_r_grid: default_grid(),
            noise_sigma,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_r_grid.is_empty() {
            return Err(Error::Argument("Ramsey grid is empty".into()));
        }
        if !(self.t_r_grid[0] >= 0.0) {
            return Err(Error::Argument(format!(
                "Ramsey grid must start at t ≥ 0, got {}",
                self.t_r_grid[0]
            )));
        }
        for w in self.t_r_grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Argument(format!(
                    "Ramsey grid must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Argument(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        if !(self.gamma2 >= 0.0) || !self.gamma2.is_finite() {
            return Err(Error::Argument(format!(
                "gamma2 must be non-negative, got {}",
                self.gamma2
            )));
        }
        if !self.detuning.is_finite() {
            return Err(Error::Argument("Ramsey detuning must be finite".into()));
        }
        Ok(())
    }
}

/// 61 delays, 0–600 ns at 10 ns spacing.
pub fn default_grid() -> Vec<f64> {
    (0..61).map(|k| k as f64 * 0.01).collect()
}

/// A (possibly noisy) Ramsey trace with the settings that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RamseyTrace {
    pub t_r: Vec<f64>,
    pub signal: Vec<f64>,
    pub config: RamseyConfig,
}

impl RamseyTrace {
    /// Build a trace from externally measured samples (e.g. a parsed CSV).
    pub fn from_samples(samples: &[(f64, f64)], mut config: RamseyConfig) -> Result<Self> {
        config.t_r_grid = samples.iter().map(|&(t, _)| t).collect();
        config.validate()?;
        Ok(RamseyTrace {
            t_r: config.t_r_grid.clone(),
            signal: samples.iter().map(|&(_, s)| s).collect(),
            config,
        })
    }

    /// Write as CSV with header `t_r_us,signal`, full double precision.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_r_us,signal")?;
        for (t, s) in self.t_r.iter().zip(&self.signal) {
            writeln!(w, "{t:.16e},{s:.16e}")?;
        }
        Ok(())
    }
}

/// Parse a `t_r_us,signal` CSV (comment lines starting with `#` and the header
/// are skipped) into (delay, signal) pairs.
pub fn parse_trace_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("t_r_us") {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |field: Option<&str>| -> Result<f64> {
            field
                .ok_or_else(|| {
                    Error::Config(format!("trace CSV line {}: missing field", lineno + 1))
                })?
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("trace CSV line {}: {e}", lineno + 1)))
        };
        let t = parse(parts.next())?;
        let s = parse(parts.next())?;
        out.push((t, s));
    }
    if out.is_empty() {
        return Err(Error::Config("trace CSV holds no data rows".into()));
    }
    Ok(out)
}

/// The cavity-phase kernel τ(t_R) = (1 − e^{−(κ+2iχ)t_R})/(κ+2iχ).
fn tau(params: &SystemParams, t_r: f64) -> Complex64 {
    let c = Complex64::new(params.kappa, 2.0 * params.chi);
    if c.norm_sqr() == 0.0 {
        // limit of the expression as κ+2iχ → 0
        return Complex64::new(t_r, 0.0);
    }
    (Complex64::ONE - (-c * t_r).exp()) / c
}

/// Noiseless Ramsey signal for initial photon number `n0` and phase offset `phi0`.
pub fn ramsey_signal(
    n0: f64,
    phi0: f64,
    params: &SystemParams,
    cfg: &RamseyConfig,
    t_r: f64,
) -> f64 {
    let phase = Complex64::new(phi0, 0.0) - 2.0 * n0 * params.chi * tau(params, t_r);
    let exponent = Complex64::new(-cfg.gamma2 * t_r, -cfg.detuning * t_r) + Complex64::I * phase;
    0.5 * (1.0 - exponent.exp().im)
}

/// Evaluate the model over the config grid (no noise).
pub fn ramsey_model(n0: f64, phi0: f64, params: &SystemParams, cfg: &RamseyConfig) -> Vec<f64> {
    cfg.t_r_grid
        .iter()
        .map(|&t| ramsey_signal(n0, phi0, params, cfg, t))
        .collect()
}

/// Synthesize a trace: the exact model plus additive Gaussian noise from a
/// seeded generator. The noisy signal is deliberately not clamped to [0, 1].
pub fn synthesize_trace(
    n0: f64,
    phi0: f64,
    params: &SystemParams,
    cfg: &RamseyConfig,
) -> Result<RamseyTrace> {
    cfg.validate()?;
    let mut signal = ramsey_model(n0, phi0, params, cfg);
    if cfg.noise_sigma > 0.0 {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(cfg.rng_seed);
        let noise = Normal::new(0.0, cfg.noise_sigma)
            .map_err(|e| Error::Argument(format!("noise distribution: {e}")))?;
        for s in &mut signal {
            *s += noise.sample(&mut rng);
        }
    }
    Ok(RamseyTrace {
        t_r: cfg.t_r_grid.clone(),
        signal,
        config: cfg.clone(),
    })
}

/// Result of a Ramsey fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitResult {
    /// Initial cavity photon number, ≥ 0.
    pub n0: f64,
    /// Phase offset in (−π, π].
    pub phi0: f64,
    /// √(Σ residual²) at the solution (signal units).
    pub residual_norm: f64,
    /// Damped Gauss-Newton iterations used by the winning start.
    pub iterations: usize,
    pub converged: bool,
}

/// Wrap a phase to (−π, π].
fn wrap_phase(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let w = phi.rem_euclid(tau);
    if w > std::f64::consts::PI {
        w - tau
    } else {
        w
    }
}

/// Fit (n₀, φ₀) to a Ramsey trace with κ, χ, Γ₂ and Δ held fixed.
///
/// Damped Gauss-Newton (Levenberg-style) with a numerical Jacobian,
/// multi-started over n₀ ∈ {0.01, 0.1, 1, 3, 10} × φ₀ ∈ {kπ/4}; n₀ is kept
/// non-negative by projection. The best basin wins (ties: lower residual, then
/// lower n₀). If no start converges, the best-effort values are returned with
/// `converged = false`.
pub fn fit_ramsey(trace: &RamseyTrace, params: &SystemParams) -> Result<FitResult> {
    let cfg = &trace.config;
    cfg.validate()?;
    let n = trace.t_r.len();
    if n != trace.signal.len() {
        return Err(Error::Argument(format!(
            "trace length mismatch: {} delays vs {} samples",
            n,
            trace.signal.len()
        )));
    }
    if n < 8 {
        return Err(Error::InsufficientData(format!(
            "need at least 8 samples, got {n}"
        )));
    }
    if cfg.detuning == 0.0 {
        return Err(Error::Argument(
            "Ramsey detuning must be nonzero to identify the fringe".into(),
        ));
    }
    let span = trace.t_r[n - 1] - trace.t_r[0];
    let period = std::f64::consts::TAU / cfg.detuning.abs();
    if span < period {
        return Err(Error::Argument(format!(
            "grid spans {span:.4} µs but one Ramsey period is {period:.4} µs; extend the grid"
        )));
    }

    let model = FitModel::new(trace, params);
    // A residual this small means the model passes through every sample; no
    // other basin can do better, so remaining starts are skipped.
    let perfect = 1e-10 * (n as f64).sqrt();
    let mut best: Option<FitResult> = None;
    'starts: for &n0_start in &[0.01, 0.1, 1.0, 3.0, 10.0] {
        for k in 0..8 {
            let phi0_start = k as f64 * std::f64::consts::FRAC_PI_4;
            let cand = lm_fit(&model, n0_start, phi0_start);
            let better = match &best {
                None => true,
                Some(b) => {
                    cand.residual_norm < b.residual_norm
                        || (cand.residual_norm == b.residual_norm && cand.n0 < b.n0)
                }
            };
            if better {
                best = Some(cand);
            }
            if best.as_ref().is_some_and(|b| b.converged && b.residual_norm < perfect) {
                break 'starts;
            }
        }
    }
    Ok(best.expect("at least one start always runs"))
}

/// Trace-specific model evaluation with the (n₀, φ₀)-independent factors
/// precomputed: S_i(n₀, φ₀) = ½[1 − Im(A_i · e^{iφ₀} · e^{n₀·c_i})] with
/// A_i = e^{−(Γ₂+iΔ)t_i} and c_i = −2iχτ(t_i).
struct FitModel<'a> {
    signal: &'a [f64],
    envelope: Vec<Complex64>,
    phase_coef: Vec<Complex64>,
}

impl<'a> FitModel<'a> {
    fn new(trace: &'a RamseyTrace, params: &SystemParams) -> Self {
        let cfg = &trace.config;
        let envelope = trace
            .t_r
            .iter()
            .map(|&t| Complex64::new(-cfg.gamma2 * t, -cfg.detuning * t).exp())
            .collect();
        let phase_coef = trace
            .t_r
            .iter()
            .map(|&t| -2.0 * Complex64::I * params.chi * tau(params, t))
            .collect();
        FitModel {
            signal: &trace.signal,
            envelope,
            phase_coef,
        }
    }

    /// Residual vector and its squared norm at (n₀, φ₀).
    fn residuals(&self, n0: f64, phi0: f64, out: &mut Vec<f64>) -> f64 {
        out.clear();
        let rot = Complex64::new(0.0, phi0).exp();
        let mut ss = 0.0;
        for i in 0..self.signal.len() {
            let s = 0.5 * (1.0 - (self.envelope[i] * rot * (n0 * self.phase_coef[i]).exp()).im);
            let d = s - self.signal[i];
            ss += d * d;
            out.push(d);
        }
        ss
    }
}

/// One damped Gauss-Newton descent from a given start.
fn lm_fit(model: &FitModel, n0_start: f64, phi0_start: f64) -> FitResult {
    let mut n0 = n0_start.max(0.0);
    let mut phi0 = phi0_start;
    let mut r = Vec::new();
    let mut ss = model.residuals(n0, phi0, &mut r);
    let (mut rp, mut rm, mut qp, mut qm, mut r2) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    'outer: for _ in 0..200 {
        iterations += 1;
        // central-difference Jacobian
        let hn = 1e-6 * n0.abs().max(1.0);
        let hp = 1e-6;
        model.residuals(n0 + hn, phi0, &mut rp);
        model.residuals(n0 - hn, phi0, &mut rm);
        model.residuals(n0, phi0 + hp, &mut qp);
        model.residuals(n0, phi0 - hp, &mut qm);
        let mut a11 = 0.0;
        let mut a12 = 0.0;
        let mut a22 = 0.0;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for i in 0..r.len() {
            let j1 = (rp[i] - rm[i]) / (2.0 * hn);
            let j2 = (qp[i] - qm[i]) / (2.0 * hp);
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            b1 -= j1 * r[i];
            b2 -= j2 * r[i];
        }

        for _ in 0..40 {
            // Marquardt scaling of the diagonal
            let d11 = a11 * (1.0 + lambda) + 1e-14;
            let d22 = a22 * (1.0 + lambda) + 1e-14;
            let det = d11 * d22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let dn = (b1 * d22 - a12 * b2) / det;
            let dp = (d11 * b2 - a12 * b1) / det;
            let step = (dn * dn + dp * dp).sqrt();
            let scale = 1.0 + (n0 * n0 + phi0 * phi0).sqrt();
            if step < 1e-10 * scale {
                converged = true;
                break 'outer;
            }
            let cand_n0 = (n0 + dn).max(0.0);
            let cand_phi0 = phi0 + dp;
            let ss2 = model.residuals(cand_n0, cand_phi0, &mut r2);
            if ss2 < ss {
                let accepted = ((cand_n0 - n0).powi(2) + (cand_phi0 - phi0).powi(2)).sqrt();
                n0 = cand_n0;
                phi0 = cand_phi0;
                std::mem::swap(&mut r, &mut r2);
                ss = ss2;
                lambda = (lambda / 3.0).max(1e-12);
                if accepted < 1e-10 * scale {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                // no descent direction left: the step has collapsed
                converged = true;
                break 'outer;
            }
        }
    }

    FitResult {
        n0,
        phi0: wrap_phase(phi0),
        residual_norm: ss.sqrt(),
        iterations,
        converged,
    }
}

/// Default photon-number floor below which decay points are excluded from
/// [`fit_exponential_decay`].
pub const DECAY_FIT_FLOOR: f64 = 1e-3;

/// Weighted log-linear exponential fit n(t) = amplitude·e^{−rate·t}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpDecayFit {
    /// Extrapolated photon number at t = 0.
    pub amplitude: f64,
    /// Decay rate (1/µs).
    pub rate: f64,
    /// Weighted R² of the log-space fit (1 = perfect).
    pub goodness: f64,
    pub n_used: usize,
    pub n_excluded: usize,
}

/// Fit an exponential decay to (t, n₀) points by weighted least squares on
/// ln n₀ vs t, weights n₀² (constant absolute noise on n₀ maps to ~1/n₀ noise
/// on ln n₀). Points with n₀ ≤ `floor` are excluded and counted.
pub fn fit_exponential_decay(points: &[(f64, f64)], floor: f64) -> Result<ExpDecayFit> {
    let usable: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, n)| n > floor).collect();
    let n_excluded = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "exponential fit needs ≥ 3 points above the floor {floor}, have {} ({} excluded)",
            usable.len(),
            n_excluded
        )));
    }
    let mut sw = 0.0;
    let mut st = 0.0;
    let mut sy = 0.0;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for &(t, n) in &usable {
        let w = n * n;
        let y = n.ln();
        sw += w;
        st += w * t;
        sy += w * y;
        stt += w * t * t;
        sty += w * t * y;
    }
    let denom = sw * stt - st * st;
    if denom.abs() <= 1e-12 * sw * stt.max(1.0) {
        return Err(Error::Argument(
            "exponential fit needs distinct time points".into(),
        ));
    }
    let slope = (sw * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / sw;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let ybar = sy / sw;
    for &(t, n) in &usable {
        let w = n * n;
        let y = n.ln();
        ss_res += w * (y - intercept - slope * t).powi(2);
        ss_tot += w * (y - ybar).powi(2);
    }
    Ok(ExpDecayFit {
        amplitude: intercept.exp(),
        rate: -slope,
        goodness: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        n_used: usable.len(),
        n_excluded,
    })
}

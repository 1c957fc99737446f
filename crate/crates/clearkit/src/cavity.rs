//! Cavity dynamics in the frame of the readout drive.
//!
//! The coherent amplitude of the driven cavity, conditioned on the qubit state,
//! follows
//!
//! ```text
//! dα/dt = -i(δ + K|α|²)α - (κ/2)α - iε(t)
//! ```
//!
//! with δ the state-dependent drive detuning ([`SystemParams::detuning_for_state`]),
//! K the self-Kerr and ε(t) the piecewise-constant drive. With K = 0 each constant
//! segment has the closed form used by [`propagate_linear`]; with K ≠ 0 segments are
//! integrated by fixed-step RK4.

use num_complex::Complex64;
use serde::Serialize;

use crate::device::{QubitState, SystemParams};
use crate::error::{Error, Result};
use crate::pulse::{PulseEnvelope, PulseSegment};

/// Exact evolution under a constant drive with K = 0:
/// `α(t) = α_ss + (α₀ - α_ss)·e^{-(κ/2 + iδ)t}` with `α_ss = -iε/(iδ + κ/2)`.
pub fn propagate_linear(
    alpha0: Complex64,
    delta: f64,
    kappa: f64,
    eps: Complex64,
    t: f64,
) -> Complex64 {
    let pole = Complex64::new(0.5 * kappa, delta);
    let alpha_ss = -Complex64::I * eps / pole;
    alpha_ss + (alpha0 - alpha_ss) * (-pole * t).exp()
}

/// Largest RK4 step considered stable for rates κ and δ.
pub fn max_rk4_step(kappa: f64, delta: f64) -> f64 {
    let mut cap = 0.02 / kappa;
    if delta != 0.0 {
        cap = cap.min(0.02 / delta.abs());
    }
    cap
}

/// Default RK4 step: well under the stability cap and never longer than 1 ns.
pub fn default_rk4_step(kappa: f64, delta: f64) -> f64 {
    max_rk4_step(kappa, delta).min(1e-3)
}

/// Integrate one constant-drive span with the Kerr term by fixed-step RK4.
/// `dt` is the nominal step; the span is divided into equal steps no longer
/// than `dt`. Steps above [`max_rk4_step`] are rejected up front.
pub fn propagate_kerr(
    alpha0: Complex64,
    delta: f64,
    kappa: f64,
    kerr: f64,
    eps: Complex64,
    t: f64,
    dt: f64,
) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("span must be non-negative, got {t}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Argument(format!("RK4 step must be positive, got {dt}")));
    }
    let cap = max_rk4_step(kappa, delta);
    if dt > cap {
        return Err(Error::Config(format!(
            "RK4 step {dt} µs exceeds the stability cap {cap:.3e} µs for kappa={kappa}, delta={delta}"
        )));
    }
    if t == 0.0 {
        return Ok(alpha0);
    }
    let steps = (t / dt).ceil().max(1.0) as u64;
    let h = t / steps as f64;
    let rhs = |a: Complex64| -> Complex64 {
        -Complex64::I * (delta + kerr * a.norm_sqr()) * a - 0.5 * kappa * a - Complex64::I * eps
    };
    let mut a = alpha0;
    for _ in 0..steps {
        let k1 = rhs(a);
        let k2 = rhs(a + 0.5 * h * k1);
        let k3 = rhs(a + 0.5 * h * k2);
        let k4 = rhs(a + h * k3);
        a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(a)
}

/// Photon number after free decay: n(t) = n₀·e^{-κt}.
pub fn free_decay(n0: f64, kappa: f64, t: f64) -> f64 {
    n0 * (-kappa * t).exp()
}

/// AC-Stark shift of the qubit from n photons in the cavity: 2χn (rad/µs).
pub fn stark_shift(params: &SystemParams, n: f64) -> f64 {
    2.0 * params.chi * n
}

/// Mapping between drive amplitude and normalized power, where P = 1 fills the
/// cavity to one photon in linear steady state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DriveCalibration {
    /// Amplitude ε₁ = √(χ² + κ²/4) that gives one steady-state photon.
    pub eps_one_photon: f64,
}

impl DriveCalibration {
    /// Drive amplitude for normalized power `p_norm` ≥ 0 (ε ∝ √P).
    pub fn eps_for_power(&self, p_norm: f64) -> Result<f64> {
        if !(p_norm >= 0.0) || !p_norm.is_finite() {
            return Err(Error::Argument(format!(
                "normalized power must be non-negative and finite, got {p_norm}"
            )));
        }
        Ok(self.eps_one_photon * p_norm.sqrt())
    }

    /// Normalized power of drive amplitude `eps`.
    pub fn power_for_eps(&self, eps: f64) -> f64 {
        (eps / self.eps_one_photon).powi(2)
    }
}

/// Build the drive calibration for a device.
pub fn calibrate_drive(params: &SystemParams) -> DriveCalibration {
    DriveCalibration {
        eps_one_photon: params.eps_one_photon(),
    }
}

/// Steady state of the Kerr cavity under a constant drive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KerrSteadyState {
    /// Photon number on the tracked branch.
    pub n: f64,
    /// True when the drive sits inside the bistable window (three coexisting
    /// solutions); the tracked lower branch is still returned.
    pub bistable: bool,
}

/// Steady-state photon number for qubit `state` under constant drive `eps`.
pub fn steady_state_kerr(params: &SystemParams, eps: f64, state: QubitState) -> KerrSteadyState {
    kerr_steady_state(params.detuning_for_state(state), params.kappa, params.kerr, eps)
}

/// Solve n·[(δ + Kn)² + κ²/4] = ε² for the branch continuously connected to
/// n = 0 at zero drive. The left side, `drive(n)`, is a cubic in n; its
/// stationary points (roots of 3K²n² + 4δKn + δ² + κ²/4) exist at positive n
/// only when δ and K have opposite signs, which opens a fold: for ε² between
/// the two knee values three roots coexist (`bistable = true`, lowest root
/// returned); above the fold only the upper root survives and is returned.
pub fn kerr_steady_state(delta: f64, kappa: f64, kerr: f64, eps: f64) -> KerrSteadyState {
    let e2 = eps * eps;
    let c = delta * delta + 0.25 * kappa * kappa;
    if e2 == 0.0 {
        return KerrSteadyState { n: 0.0, bistable: false };
    }
    if kerr == 0.0 {
        return KerrSteadyState { n: e2 / c, bistable: false };
    }
    let drive = |n: f64| n * ((delta + kerr * n).powi(2) + 0.25 * kappa * kappa);
    let a3 = 3.0 * kerr * kerr;
    let b3 = 4.0 * delta * kerr;
    let disc = b3 * b3 - 4.0 * a3 * c;

    let mut bistable = false;
    let (lo, hi);
    if disc > 0.0 && b3 < 0.0 {
        // Two stationary points at positive n: a local max (first knee) and a
        // local min (second knee) of drive(n).
        let s = disc.sqrt();
        let n_knee_top = (-b3 - s) / (2.0 * a3);
        let n_knee_bot = (-b3 + s) / (2.0 * a3);
        let e_top = drive(n_knee_top);
        let e_bot = drive(n_knee_bot);
        if e2 < e_top {
            bistable = e2 > e_bot;
            lo = 0.0;
            hi = n_knee_top;
        } else {
            // The lower branch has folded away; take the remaining upper root.
            lo = n_knee_bot;
            hi = bracket_above(&drive, e2, n_knee_bot.max(e2 / c));
        }
    } else {
        // drive(n) is monotone for n ≥ 0: a single root.
        lo = 0.0;
        hi = bracket_above(&drive, e2, e2 / c);
    }
    let n = bisect_root(|n| drive(n) - e2, lo, hi);
    KerrSteadyState { n, bistable }
}

/// Grow `hi` from `start` until `drive(hi) > e2`.
fn bracket_above(drive: &impl Fn(f64) -> f64, e2: f64, start: f64) -> f64 {
    let mut hi = start.max(1e-12);
    for _ in 0..200 {
        if drive(hi) > e2 {
            return hi;
        }
        hi *= 2.0;
    }
    hi
}

/// Bisection on a bracket with f(lo) ≤ 0 ≤ f(hi).
fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= f64::EPSILON * mid.abs().max(1e-300) {
            return mid;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Options for trajectory simulation.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    /// Include the Kerr term (fixed-step RK4); with `false` each segment uses
    /// the exact linear propagator.
    pub kerr_enabled: bool,
    /// Spacing of output samples (µs). Segment boundaries are always included.
    pub sample_interval: f64,
    /// Extra drive-off time appended after the envelope to watch the ring-down (µs).
    pub tail: f64,
    /// Override the RK4 step (µs); defaults to [`default_rk4_step`].
    pub rk4_step: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            kerr_enabled: true,
            sample_interval: 1e-3,
            tail: 0.0,
            rk4_step: None,
        }
    }
}

impl SimOptions {
    fn validate(&self) -> Result<()> {
        if !(self.sample_interval > 0.0) || !self.sample_interval.is_finite() {
            return Err(Error::Argument(format!(
                "sample interval must be positive, got {}",
                self.sample_interval
            )));
        }
        if !(self.tail >= 0.0) || !self.tail.is_finite() {
            return Err(Error::Argument(format!(
                "tail must be non-negative, got {}",
                self.tail
            )));
        }
        Ok(())
    }
}

/// Sampled cavity amplitude for one qubit state.
#[derive(Debug, Clone)]
pub struct BranchTrajectory {
    pub times: Vec<f64>,
    pub alpha: Vec<Complex64>,
}

impl BranchTrajectory {
    pub fn final_alpha(&self) -> Complex64 {
        *self.alpha.last().expect("trajectory is never empty")
    }

    pub fn final_photons(&self) -> f64 {
        self.final_alpha().norm_sqr()
    }
}

/// Sampled cavity amplitudes for both qubit states on a common time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub ground: Vec<Complex64>,
    pub excited: Vec<Complex64>,
}

impl Trajectory {
    pub fn branch(&self, state: QubitState) -> &[Complex64] {
        match state {
            QubitState::Ground => &self.ground,
            QubitState::Excited => &self.excited,
        }
    }

    pub fn final_alpha(&self, state: QubitState) -> Complex64 {
        *self.branch(state).last().expect("trajectory is never empty")
    }

    pub fn final_photons(&self, state: QubitState) -> f64 {
        self.final_alpha(state).norm_sqr()
    }

    pub fn max_photons(&self, state: QubitState) -> f64 {
        self.branch(state)
            .iter()
            .map(|a| a.norm_sqr())
            .fold(0.0, f64::max)
    }

    /// Write the trajectory as CSV with header
    /// `t_us,re_g,im_g,re_e,im_e,n_g,n_e`, values in `{:.16e}` format.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_us,re_g,im_g,re_e,im_e,n_g,n_e")?;
        for i in 0..self.times.len() {
            let g = self.ground[i];
            let e = self.excited[i];
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i],
                g.re,
                g.im,
                e.re,
                e.im,
                g.norm_sqr(),
                e.norm_sqr()
            )?;
        }
        Ok(())
    }
}

/// Simulate the cavity response to `pulse` for one qubit state, starting from
/// vacuum. Sample times are the uniform grid plus every segment boundary.
pub fn simulate_branch(
    params: &SystemParams,
    pulse: &PulseEnvelope,
    state: QubitState,
    opts: &SimOptions,
) -> Result<BranchTrajectory> {
    opts.validate()?;
    let delta = params.detuning_for_state(state);
    let kerr = if opts.kerr_enabled { params.kerr } else { 0.0 };
    let dt = opts
        .rk4_step
        .unwrap_or_else(|| default_rk4_step(params.kappa, delta));

    let mut segs: Vec<PulseSegment> = pulse.segments().to_vec();
    if opts.tail > 0.0 {
        segs.push(PulseSegment::real(0.0, opts.tail));
    }
    let total: f64 = segs.iter().map(|s| s.duration).sum();
    let times = sample_grid(&segs, total, opts.sample_interval)?;

    let mut alpha = Vec::with_capacity(times.len());
    alpha.push(Complex64::ZERO);
    let tol = 1e-12 * total.max(1.0);
    let mut idx = 1;
    let mut seg_start = 0.0;
    let mut alpha_seg = Complex64::ZERO;
    for seg in &segs {
        let seg_end = seg_start + seg.duration;
        let mut a_prev = alpha_seg;
        let mut t_prev = seg_start;
        while idx < times.len() && times[idx] <= seg_end + tol {
            let t = times[idx].min(seg_end);
            let a = if kerr != 0.0 {
                propagate_kerr(a_prev, delta, params.kappa, kerr, seg.amplitude, t - t_prev, dt)?
            } else {
                propagate_linear(alpha_seg, delta, params.kappa, seg.amplitude, t - seg_start)
            };
            alpha.push(a);
            a_prev = a;
            t_prev = t;
            idx += 1;
        }
        // The grid contains every boundary, so the last sample sat on seg_end.
        alpha_seg = *alpha.last().unwrap();
        seg_start = seg_end;
    }
    debug_assert_eq!(alpha.len(), times.len());
    Ok(BranchTrajectory { times, alpha })
}

/// Simulate both qubit-state branches of `pulse` on a common grid.
pub fn simulate_pulse(
    params: &SystemParams,
    pulse: &PulseEnvelope,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let g = simulate_branch(params, pulse, QubitState::Ground, opts)?;
    let e = simulate_branch(params, pulse, QubitState::Excited, opts)?;
    debug_assert_eq!(g.times.len(), e.times.len());
    Ok(Trajectory {
        times: g.times,
        ground: g.alpha,
        excited: e.alpha,
    })
}

/// Uniform samples every `sample_interval` plus all segment boundaries,
/// sorted and deduplicated; starts at 0 and ends at `total`.
fn sample_grid(segs: &[PulseSegment], total: f64, sample_interval: f64) -> Result<Vec<f64>> {
    let approx_count = total / sample_interval;
    if approx_count > 2e7 {
        return Err(Error::Argument(format!(
            "sample grid would hold ~{approx_count:.0} points; use a coarser sample interval"
        )));
    }
    let mut times = Vec::with_capacity(approx_count as usize + segs.len() + 2);
    let mut k = 0u64;
    loop {
        let t = k as f64 * sample_interval;
        if t >= total {
            break;
        }
        times.push(t);
        k += 1;
    }
    let mut acc = 0.0;
    for s in segs {
        acc += s.duration;
        if acc < total {
            times.push(acc);
        }
    }
    times.push(total);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = 1e-12 * total.max(1.0);
    times.dedup_by(|next, prev| (*next - *prev).abs() <= tol);
    Ok(times)
}

//! Helpers shared by the integration suites.
//!
//! The centerpiece is a fixed-step RK4 integrator for the driven Kerr cavity
//! written straight from the textbook Butcher tableau, deliberately sharing no
//! code with the library's integrator or closed-form propagator. Tests use it
//! as an independent referee: when the library and this oracle agree, a bug
//! would have to exist twice, in two different shapes, to go unnoticed.

#![allow(dead_code)] // each test binary pulls in a different subset

use clearkit::device::{DeviceConfig, SystemParams};
use num_complex::Complex64;

/// Cavity equation of motion, restated independently of the library:
/// dα/dt = −i(δ + K|α|²)α − (κ/2)α − iε.
fn eom(alpha: Complex64, delta: f64, kappa: f64, kerr: f64, eps: Complex64) -> Complex64 {
    let rotation = Complex64::new(0.0, -(delta + kerr * alpha.norm_sqr()));
    rotation * alpha - 0.5 * kappa * alpha - Complex64::new(0.0, 1.0) * eps
}

/// Integrate one constant-drive span with classic RK4 at step `h` (the last
/// step is shortened to land exactly on `t`).
pub fn oracle_propagate(
    alpha0: Complex64,
    delta: f64,
    kappa: f64,
    kerr: f64,
    eps: Complex64,
    t: f64,
    h: f64,
) -> Complex64 {
    assert!(t >= 0.0 && h > 0.0, "bad oracle span t={t}, h={h}");
    let mut alpha = alpha0;
    let mut remaining = t;
    while remaining > 0.0 {
        let step = remaining.min(h);
        let k1 = eom(alpha, delta, kappa, kerr, eps);
        let k2 = eom(alpha + k1 * (step / 2.0), delta, kappa, kerr, eps);
        let k3 = eom(alpha + k2 * (step / 2.0), delta, kappa, kerr, eps);
        let k4 = eom(alpha + k3 * step, delta, kappa, kerr, eps);
        alpha += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
        remaining -= step;
    }
    alpha
}

/// Run a piecewise-constant drive from vacuum and return the final amplitude.
pub fn oracle_pulse(
    segments: &[(Complex64, f64)],
    delta: f64,
    kappa: f64,
    kerr: f64,
    h: f64,
) -> Complex64 {
    let mut alpha = Complex64::new(0.0, 0.0);
    for &(eps, duration) in segments {
        alpha = oracle_propagate(alpha, delta, kappa, kerr, eps, duration, h);
    }
    alpha
}

/// Resolved parameters of the built-in demo device.
pub fn demo_params() -> SystemParams {
    DeviceConfig::demo()
        .resolve()
        .expect("demo device resolves")
        .params
}

/// Linear-interpolated percentile (p in [0, 100]) of an unsorted sample.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty() && (0.0..=100.0).contains(&p));
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

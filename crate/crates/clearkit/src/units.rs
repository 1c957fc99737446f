//! Unit conventions and boundary conversions.
//!
//! Everything inside the crate works in angular frequency (rad/µs) and time (µs).
//! These helpers convert the ordinary-frequency lab units used in config files
//! and on the CLI. `x MHz` of ordinary frequency is `2π·x rad/µs` of angular
//! frequency, so rates like κ compose directly with times in µs.

use std::f64::consts::TAU;

/// Ordinary frequency in MHz → angular frequency in rad/µs.
pub fn mhz(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

/// Ordinary frequency in kHz → angular frequency in rad/µs.
pub fn khz(f_khz: f64) -> f64 {
    TAU * 1e-3 * f_khz
}

/// Ordinary frequency in GHz → angular frequency in rad/µs.
pub fn ghz(f_ghz: f64) -> f64 {
    TAU * 1e3 * f_ghz
}

/// Angular frequency in rad/µs → ordinary frequency in MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / TAU
}

/// Angular frequency in rad/µs → ordinary frequency in kHz.
pub fn to_khz(w: f64) -> f64 {
    1e3 * w / TAU
}

/// Time in ns → µs.
pub fn ns(t_ns: f64) -> f64 {
    1e-3 * t_ns
}

/// Time in µs → ns.
pub fn to_ns(t_us: f64) -> f64 {
    1e3 * t_us
}

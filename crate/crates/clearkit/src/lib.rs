//! Toolkit for resetting a dispersively coupled readout resonator with CLEAR-style
//! pulses: two-segment ring-up / ring-down design, Kerr-cavity simulation, Ramsey-based
//! residual-photon measurement, and derivative-free pulse optimization.
//!
//! Internally all frequencies are *angular* (rad/µs) and all times are in µs.
//! Configuration files and CLI flags use ordinary lab units (MHz, kHz, GHz, ns);
//! the conversion happens once, at the boundary, in [`device`] and [`units`].

pub mod cavity;
pub mod design;
pub mod device;
pub mod error;
pub mod experiments;
pub mod optim;
pub mod pulse;
pub mod ramsey;
pub mod units;

pub use error::{Error, Result};

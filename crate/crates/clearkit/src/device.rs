//! Device parameters: the JSON config schema, validation, and the internal
//! parameter set used by every other module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::design;
use crate::error::{Error, Result};
use crate::units;

/// Which qubit state the cavity dynamics are conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitState {
    Ground,
    Excited,
}

impl QubitState {
    pub const BOTH: [QubitState; 2] = [QubitState::Ground, QubitState::Excited];

    /// Short label used in CSV headers and filenames.
    pub fn label(self) -> &'static str {
        match self {
            QubitState::Ground => "g",
            QubitState::Excited => "e",
        }
    }
}

/// System parameters in internal units: angular frequencies in rad/µs, times in µs.
///
/// `chi` is the *half* dispersive shift: the cavity sits at `-chi` (qubit ground)
/// or `+chi` (qubit excited) relative to the drive placed halfway between the two
/// pulled resonances, so the full ground–excited splitting is `2|chi|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SystemParams {
    /// Cavity linewidth κ (rad/µs).
    pub kappa: f64,
    /// Half dispersive shift χ (rad/µs); negative for a transmon below the cavity.
    pub chi: f64,
    /// Cavity self-Kerr K (rad/µs); negative (softening) for a transmon.
    pub kerr: f64,
    /// Qubit–cavity coupling g (rad/µs).
    pub g: f64,
    /// Qubit transition frequency ω_q (rad/µs).
    pub omega_q: f64,
    /// Dressed cavity frequency ω_r (rad/µs), qubit in the ground state.
    pub omega_r_dressed: f64,
    /// Bare cavity frequency (rad/µs).
    pub omega_r_bare: f64,
    /// Transmon anharmonicity α (rad/µs); negative.
    pub anharmonicity: f64,
    /// Qubit echo coherence time T₂ᴱ (µs).
    pub t2_echo: f64,
}

impl SystemParams {
    /// Drive detuning seen by the cavity for a given qubit state, with the drive
    /// placed midway between the two pulled resonances: `-chi` for ground,
    /// `+chi` for excited. With `chi < 0` the ground-state detuning is positive.
    pub fn detuning_for_state(&self, state: QubitState) -> f64 {
        match state {
            QubitState::Ground => -self.chi,
            QubitState::Excited => self.chi,
        }
    }

    /// Qubit dephasing rate Γ₂ = 1/T₂ᴱ (1/µs).
    pub fn gamma2(&self) -> f64 {
        1.0 / self.t2_echo
    }

    /// Drive amplitude that fills the cavity to one photon in steady state
    /// (drive midway between the pulled peaks): ε₁ = √(χ² + κ²/4).
    pub fn eps_one_photon(&self) -> f64 {
        (self.chi * self.chi + 0.25 * self.kappa * self.kappa).sqrt()
    }

    /// Linear steady-state amplitude α_ss = -iε / (iδ + κ/2) for qubit `state`.
    pub fn steady_state_linear(&self, eps: Complex64, state: QubitState) -> Complex64 {
        let delta = self.detuning_for_state(state);
        -Complex64::I * eps / Complex64::new(0.5 * self.kappa, delta)
    }
}

/// On-disk device description in lab units. Unknown keys are rejected so a typo
/// can't silently fall back to a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    /// Cavity linewidth κ/2π (MHz).
    pub kappa_mhz: f64,
    /// Half dispersive shift χ/2π (MHz); the full pull between qubit states is 2|χ|.
    pub chi_mhz: f64,
    /// Cavity self-Kerr K/2π (kHz). Computed from the coupling if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kerr_khz: Option<f64>,
    /// Qubit transition frequency (GHz).
    pub f_qubit_ghz: f64,
    /// Dressed cavity frequency (GHz), qubit in the ground state.
    pub f_cavity_dressed_ghz: f64,
    /// Bare cavity frequency (GHz).
    pub f_cavity_bare_ghz: f64,
    /// Transmon anharmonicity α/2π (MHz); negative.
    pub anharmonicity_mhz: f64,
    /// Qubit echo coherence time T₂ᴱ (µs).
    pub t2_echo_us: f64,
    /// Qubit–cavity coupling g/2π (MHz). Derived from χ if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_mhz: Option<f64>,
}

/// A validated device plus a record of which constants were derived rather than
/// taken from the config (written into run manifests).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolvedDevice {
    pub params: SystemParams,
    /// True when `g` was derived from χ, Δ and the anharmonicity.
    pub g_derived: bool,
    /// True when the self-Kerr was derived from g rather than read from the config.
    pub kerr_derived: bool,
}

impl DeviceConfig {
    /// The demonstration device the toolkit defaults are tuned for: a 4.8 GHz
    /// transmon read out through a 10.76 GHz cavity with κ/2π = 1.1 MHz,
    /// χ/2π = -1.3 MHz and a measured self-Kerr of -14 kHz.
    pub fn demo() -> Self {
        DeviceConfig {
            kappa_mhz: 1.1,
            chi_mhz: -1.3,
            kerr_khz: Some(-14.0),
            f_qubit_ghz: 4.83315,
            f_cavity_dressed_ghz: 10.7594,
            f_cavity_bare_ghz: 10.7457,
            anharmonicity_mhz: -155.0,
            t2_echo_us: 60.0,
            g_mhz: None,
        }
    }

    /// Parse and validate a JSON device description.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: DeviceConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("device file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read, parse and validate a device file.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read device file {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        let finite = [
            ("kappa_mhz", self.kappa_mhz),
            ("chi_mhz", self.chi_mhz),
            ("f_qubit_ghz", self.f_qubit_ghz),
            ("f_cavity_dressed_ghz", self.f_cavity_dressed_ghz),
            ("f_cavity_bare_ghz", self.f_cavity_bare_ghz),
            ("anharmonicity_mhz", self.anharmonicity_mhz),
            ("t2_echo_us", self.t2_echo_us),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [self.kerr_khz.map(|v| ("kerr_khz", v)), self.g_mhz.map(|v| ("g_mhz", v))]
            .into_iter()
            .flatten()
        {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.kappa_mhz <= 0.0 {
            return Err(Error::Config(format!(
                "kappa_mhz must be positive, got {}",
                self.kappa_mhz
            )));
        }
        if self.chi_mhz == 0.0 {
            return Err(Error::Config("chi_mhz must be nonzero".into()));
        }
        if self.chi_mhz > 0.0 {
            log::warn!(
                "chi_mhz = {} is positive; transmon readouts normally have chi < 0",
                self.chi_mhz
            );
        }
        if self.t2_echo_us <= 0.0 {
            return Err(Error::Config(format!(
                "t2_echo_us must be positive, got {}",
                self.t2_echo_us
            )));
        }
        if self.f_qubit_ghz <= 0.0 || self.f_cavity_dressed_ghz <= 0.0 || self.f_cavity_bare_ghz <= 0.0 {
            return Err(Error::Config("frequencies must be positive".into()));
        }
        if self.anharmonicity_mhz == 0.0 {
            return Err(Error::Config("anharmonicity_mhz must be nonzero".into()));
        }
        if self.f_qubit_ghz == self.f_cavity_dressed_ghz {
            return Err(Error::Config(
                "qubit and cavity frequencies must differ (dispersive regime)".into(),
            ));
        }
        Ok(())
    }

    /// Convert to internal units, deriving g and the self-Kerr when absent.
    pub fn resolve(&self) -> Result<ResolvedDevice> {
        self.validate()?;
        let chi = units::mhz(self.chi_mhz);
        let omega_q = units::ghz(self.f_qubit_ghz);
        let omega_r_dressed = units::ghz(self.f_cavity_dressed_ghz);
        let anharmonicity = units::mhz(self.anharmonicity_mhz);

        let (g, g_derived) = match self.g_mhz {
            Some(g_mhz) => (units::mhz(g_mhz), false),
            None => (
                design::derive_g_parts(chi, omega_q - omega_r_dressed, anharmonicity)?,
                true,
            ),
        };
        let (kerr, kerr_derived) = match self.kerr_khz {
            Some(k_khz) => (units::khz(k_khz), false),
            None => (
                design::kerr_from_parts(g, omega_q, omega_r_dressed, anharmonicity)?,
                true,
            ),
        };

        Ok(ResolvedDevice {
            params: SystemParams {
                kappa: units::mhz(self.kappa_mhz),
                chi,
                kerr,
                g,
                omega_q,
                omega_r_dressed,
                omega_r_bare: units::ghz(self.f_cavity_bare_ghz),
                anharmonicity,
                t2_echo: self.t2_echo_us,
            },
            g_derived,
            kerr_derived,
        })
    }
}

impl SystemParams {
    /// Internal-unit parameters of the demonstration device.
    pub fn demo() -> Self {
        DeviceConfig::demo()
            .resolve()
            .expect("built-in demo device is valid")
            .params
    }
}

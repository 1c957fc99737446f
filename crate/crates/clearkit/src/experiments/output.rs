//! Artifact writing with a reproducibility manifest.
//!
//! Every scenario run lands in one output directory: CSV/JSON artifacts plus a
//! `manifest.json` recording the inputs (device, settings, seed), the derived
//! internal-unit constants, and a SHA-256 checksum of every artifact. The CSVs
//! carry the manifest's config hash in a `#` comment block so a stray file can
//! be traced back to the run that produced it. Outputs are pure functions of
//! (config, seed): re-running a scenario reproduces every byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::device::{DeviceConfig, ResolvedDevice};
use crate::error::{Error, Result};

/// Internal-unit constants actually used by a run, including the ones filled
/// in from coupling formulas rather than read from the device file.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolvedConstants {
    pub kappa_rad_per_us: f64,
    pub chi_rad_per_us: f64,
    pub kerr_rad_per_us: f64,
    pub g_rad_per_us: f64,
    pub gamma2_per_us: f64,
    pub eps_one_photon_rad_per_us: f64,
    /// True when g was derived from the dispersive shift.
    pub g_derived: bool,
    /// True when the self-Kerr was derived from g.
    pub kerr_derived: bool,
}

impl ResolvedConstants {
    pub fn from_device(resolved: &ResolvedDevice) -> Self {
        let p = &resolved.params;
        ResolvedConstants {
            kappa_rad_per_us: p.kappa,
            chi_rad_per_us: p.chi,
            kerr_rad_per_us: p.kerr,
            g_rad_per_us: p.g,
            gamma2_per_us: p.gamma2(),
            eps_one_photon_rad_per_us: p.eps_one_photon(),
            g_derived: resolved.g_derived,
            kerr_derived: resolved.kerr_derived,
        }
    }
}

/// Everything that determines a run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfigRecord {
    pub scenario: String,
    pub seed: u64,
    pub device: DeviceConfig,
    pub resolved: ResolvedConstants,
    /// Effective settings after defaults and `--set` overrides (sorted by key).
    pub settings: BTreeMap<String, f64>,
}

/// What a finished run looks like to the caller.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub out_dir: PathBuf,
    /// Artifact file names, `manifest.json` last.
    pub artifacts: Vec<String>,
    /// SHA-256 of the serialized run config (the hash stamped into the CSVs).
    pub config_sha256: String,
}

/// Writes artifacts into one directory and accumulates their checksums.
pub struct OutputWriter {
    dir: PathBuf,
    config: RunConfigRecord,
    config_hash: String,
    artifacts: BTreeMap<String, String>,
}

impl OutputWriter {
    /// Create the output directory (and parents) and fix the config hash.
    pub fn create(dir: &Path, config: RunConfigRecord) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| {
            Error::Config(format!(
                "cannot create output directory {}: {e}",
                dir.display()
            ))
        })?;
        let config_json = serde_json::to_string(&config)?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            config,
            config_hash: sha256_hex(config_json.as_bytes()),
            artifacts: BTreeMap::new(),
        })
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    /// Write a CSV artifact: a `#` comment block tying the file to its run,
    /// then whatever `body` writes (header row first, by convention).
    pub fn write_csv(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<()> {
        let mut buf = Vec::new();
        use std::io::Write as _;
        writeln!(buf, "# scenario: {}", self.config.scenario)?;
        writeln!(buf, "# seed: {}", self.config.seed)?;
        writeln!(buf, "# config_sha256: {}", self.config_hash)?;
        body(&mut buf)?;
        self.put(name, buf)
    }

    /// Write a pretty-printed JSON artifact.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.put(name, text.into_bytes())
    }

    fn put(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        fs::write(self.dir.join(name), &bytes)?;
        self.artifacts.insert(name.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// Write `manifest.json` (config, config hash, artifact checksums) and
    /// hand back the run summary.
    pub fn finish(self) -> Result<RunSummary> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            #[serde(flatten)]
            config: &'a RunConfigRecord,
            config_sha256: &'a str,
            /// file name → SHA-256 of the file's bytes
            artifacts: &'a BTreeMap<String, String>,
        }
        let manifest = Manifest {
            config: &self.config,
            config_sha256: &self.config_hash,
            artifacts: &self.artifacts,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), &text)?;
        let mut names: Vec<String> = self.artifacts.keys().cloned().collect();
        names.push("manifest.json".to_string());
        Ok(RunSummary {
            scenario: self.config.scenario,
            out_dir: self.dir,
            artifacts: names,
            config_sha256: self.config_hash,
        })
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write as _;
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

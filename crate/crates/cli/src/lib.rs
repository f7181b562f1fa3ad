//! Support code for the `sqglab` binary: config loading, atomic output and
//! run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sqglab::evolve::SimConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// A simulation config as read from disk, with the exact bytes kept for
/// hashing.
#[derive(Debug)]
pub struct LoadedConfig {
    pub config: SimConfig,
    pub sha256: String,
}

/// Parses a config, fills defaults and checks every constraint. All
/// violations are reported together, each prefixed by its field name.
pub fn validate_config(path: &Path) -> Result<LoadedConfig> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let config: SimConfig = serde_json::from_slice(&bytes)
        .with_context(|| format!("{}: not a valid simulation config", path.display()))?;
    let violations = config.violations();
    if !violations.is_empty() {
        bail!(
            "{}: invalid config\n  {}",
            path.display(),
            violations.join("\n  ")
        );
    }
    Ok(LoadedConfig {
        config,
        sha256: sha256_hex(&bytes),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance of one invocation, written next to its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// SHA-256 of the config file bytes, or of the canonical JSON of the
    /// command-line parameters for flag-only subcommands.
    pub config_sha256: String,
    pub version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputRecord>,
    pub seed: Option<u64>,
}

/// Collects outputs of a run and writes them atomically.
pub struct Run {
    subcommand: String,
    config_sha256: String,
    seed: Option<u64>,
    started: Instant,
    outputs: Vec<OutputRecord>,
}

impl Run {
    pub fn new(subcommand: &str, config_sha256: String, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_owned(),
            config_sha256,
            seed,
            started: Instant::now(),
            outputs: Vec::new(),
        }
    }

    /// Hash of the canonical JSON of `params`.
    pub fn params_hash(params: &impl Serialize) -> Result<String> {
        Ok(sha256_hex(&serde_json::to_vec(params)?))
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.outputs.push(OutputRecord {
            path: path.to_owned(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish(self, path: &Path) -> Result<RunManifest> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            config_sha256: self.config_sha256,
            version: VERSION.to_owned(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
            seed: self.seed,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
        Ok(manifest)
    }
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

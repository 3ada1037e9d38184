use std::fs;
use std::path::{Path, PathBuf};

use phecd_core::dem::DemVariant;
use phecd_core::demcd::VrfyMode;
use phecd_core::phecd::SchemeConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Optional JSON run configuration; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    /// Full scheme parameters; replaces the preset when present.
    pub scheme: Option<SchemeConfig>,
    pub lambda: Option<usize>,
    pub dem: Option<DemVariant>,
    pub vrfy_mode: Option<VrfyMode>,
    pub game: Option<String>,
    pub adversary: Option<String>,
    pub trials: Option<u64>,
    pub q_e: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub message: Option<String>,
    pub path: Option<DemoPath>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// n = 2048 noisy source, 16-qubit payload.
    Reference,
    /// n = 256 source for fast games.
    Game,
    /// n = 8 enumerable source with p_E = 0.25.
    Tiny,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DemoPath {
    Decrypt,
    Delete,
    /// Decrypt, then try to delete the same ciphertext.
    Both,
}

/// Scheme flags shared by `demo` and `game`.
#[derive(Debug, Clone, Default)]
pub struct SchemeFlags {
    pub preset: Option<Preset>,
    pub lambda: Option<usize>,
    pub dem: Option<DemVariant>,
    pub vrfy_mode: Option<VrfyMode>,
}

pub const DEFAULT_LAMBDA: usize = 16;

/// Resolves the scheme and a short label for it.
pub fn resolve_scheme(
    flags: &SchemeFlags,
    file: &RunConfig,
) -> Result<(String, SchemeConfig), CliError> {
    let preset = flags.preset.or(file.preset);
    let dem = flags.dem.or(file.dem);
    let lambda = flags.lambda.or(file.lambda);
    let (label, mut config) = match (&file.scheme, preset) {
        (Some(scheme), None) => ("custom".to_string(), scheme.clone()),
        (_, Some(Preset::Tiny)) => ("tiny".to_string(), SchemeConfig::tiny(0.25)),
        (_, Some(Preset::Reference)) => {
            let dem = dem.unwrap_or(DemVariant::Otp);
            ("reference".to_string(), SchemeConfig::reference(dem))
        }
        (_, Some(Preset::Game) | None) => {
            let dem = dem.unwrap_or(DemVariant::Otp);
            (
                "game".to_string(),
                SchemeConfig::game(dem, lambda.unwrap_or(DEFAULT_LAMBDA)),
            )
        }
    };
    if let Some(dem) = dem {
        config.dem = dem;
    }
    if let Some(lambda) = lambda {
        config.lambda = lambda;
    }
    if let Some(mode) = flags.vrfy_mode.or(file.vrfy_mode) {
        config.vrfy_mode = mode;
    }
    Ok((label, config))
}

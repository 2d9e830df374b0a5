//! Optional TOML configuration with sweep lists. Command-line flags take
//! precedence over every value here.

use std::path::Path;

use serde::Deserialize;

use crate::commands::{QuantitySelector, SchemeKind};
use crate::report::Format;
use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub format: Option<Format>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub ip: IpConfig,
    #[serde(default)]
    pub pir: PirConfig,
    #[serde(default, rename = "pir-entangled")]
    pub pir_entangled: PirEntangledConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpConfig {
    #[serde(default)]
    pub n: Vec<usize>,
    /// Split points of the tradeoff protocol.
    #[serde(default)]
    pub t: Vec<usize>,
    /// Measurement rounds for the superposed cost; `-1` stands for never.
    #[serde(default)]
    pub measure_after: Vec<i64>,
    pub quantity: Option<QuantitySelector>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PirConfig {
    pub scheme: Option<SchemeKind>,
    #[serde(default)]
    pub n: Vec<usize>,
    pub d: Option<usize>,
    pub costs: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PirEntangledConfig {
    #[serde(default)]
    pub ell: Vec<usize>,
    pub database: Option<String>,
    pub index: Option<usize>,
    pub costs: Option<bool>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

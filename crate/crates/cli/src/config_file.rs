//! Config file loading. TOML, one struct per section, every field optional
//! with the built-in defaults; unknown keys are rejected so typos fail loudly.

use std::fs;
use std::path::Path;

use liwa_core::SimConfig;

use crate::CliError;

/// Parse and fully validate a TOML experiment config. An empty file yields
/// the default experiment (interference-free layout, capacity setting 1,
/// 8 static users).
pub fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        what: format!("reading config {}", path.display()),
        source,
    })?;
    parse_config(&text).map_err(|err| match err {
        CliError::ConfigParse { detail } => CliError::ConfigParse {
            detail: format!("{}: {detail}", path.display()),
        },
        other => other,
    })
}

/// Parse a TOML string into a validated config.
pub fn parse_config(text: &str) -> Result<SimConfig, CliError> {
    let cfg: SimConfig = toml::from_str(text).map_err(|e| CliError::ConfigParse {
        detail: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

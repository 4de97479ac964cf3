//! Versioned policy checkpoints: JSON dump of both networks' dimensions and
//! parameters plus the hash of the config that produced them. Reloading
//! reproduces evaluation actions exactly (JSON floats round-trip bit-for-bit).

use std::fs;
use std::path::Path;

use liwa_core::rl::{ActorCritic, PolicyParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config_hash: String,
    pub params: PolicyParams,
}

pub fn save_checkpoint(
    path: &Path,
    policy: &ActorCritic,
    config_hash: &str,
) -> Result<(), CliError> {
    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        config_hash: config_hash.to_string(),
        params: policy.to_params(),
    };
    let json = serde_json::to_string_pretty(&checkpoint).map_err(|e| CliError::Internal {
        detail: format!("serializing checkpoint: {e}"),
    })?;
    fs::write(path, json).map_err(|source| CliError::Io {
        what: format!("writing checkpoint {}", path.display()),
        source,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        what: format!("reading checkpoint {}", path.display()),
        source,
    })?;
    let checkpoint: Checkpoint = serde_json::from_str(&text).map_err(|e| CliError::ConfigParse {
        detail: format!("{}: {e}", path.display()),
    })?;
    if checkpoint.version != CHECKPOINT_VERSION {
        return Err(CliError::Checkpoint {
            detail: format!(
                "unsupported checkpoint version {} (expected {})",
                checkpoint.version, CHECKPOINT_VERSION
            ),
        });
    }
    Ok(checkpoint)
}

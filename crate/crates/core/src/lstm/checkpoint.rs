use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::ingest::write_file;
use crate::preprocess::ScalerParams;

pub const CHECKPOINT_FORMAT: &str = "grace-acc-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained model on disk: config echo, the scaler its targets were
/// normalised with, and every parameter array with its shape. Stored as JSON
/// with shortest round-trip float formatting, so save → load is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: TrainConfig,
    pub scaler: Option<ScalerParams>,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn new(config: TrainConfig, scaler: Option<ScalerParams>, params: ModelParams) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            config,
            scaler,
            params,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("checkpoint serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format `{}`", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {}",
                ck.version
            )));
        }
        ck.params.validate()?;
        if ck.params.look_back != ck.config.look_back {
            return Err(Error::Checkpoint(
                "config look_back disagrees with parameters".into(),
            ));
        }
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

//! From-scratch LSTM regressor: one LSTM layer followed by a stack of linear
//! dense layers, trained with Adam on mean squared error. Everything runs in
//! `f64` on a single thread and is a pure function of data, config and seed.

mod adam;
mod checkpoint;
mod model;
mod params;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use model::{
    backward, forward_cached, lstm_backward, lstm_forward, mae, model_forward, mse, predict,
    ForwardCache, LstmCache, StepCache,
};
pub use params::{glorot_limit, init_params, DenseParams, LstmParams, ModelParams, Tensor};
pub use train::{fit, fit_from, split_validation, EpochStats, TrainHistory};

/// How a look-back window is presented to the LSTM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InputLayout {
    /// One timestep carrying all `look_back` values as features.
    #[default]
    OneStepLookbackFeatures,
    /// `look_back` timesteps of one feature each.
    LookbackStepsOneFeature,
}

impl InputLayout {
    /// `(timesteps, input_dim)` for a window of `look_back` values.
    pub fn sequence_shape(self, look_back: usize) -> (usize, usize) {
        match self {
            InputLayout::OneStepLookbackFeatures => (1, look_back),
            InputLayout::LookbackStepsOneFeature => (look_back, 1),
        }
    }
}

impl fmt::Display for InputLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputLayout::OneStepLookbackFeatures => "one_step_lookback_features",
            InputLayout::LookbackStepsOneFeature => "lookback_steps_one_feature",
        })
    }
}

impl FromStr for InputLayout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "one_step_lookback_features" => Ok(InputLayout::OneStepLookbackFeatures),
            "lookback_steps_one_feature" => Ok(InputLayout::LookbackStepsOneFeature),
            other => Err(format!(
                "unknown input layout `{other}` (expected one_step_lookback_features or lookback_steps_one_feature)"
            )),
        }
    }
}

/// Architecture and optimisation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub look_back: usize,
    pub hidden_size: usize,
    /// Units of each dense layer after the LSTM; the last must be 1.
    pub dense_units: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub validation_fraction: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub rng_seed: u64,
    pub input_layout: InputLayout,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            look_back: 15,
            hidden_size: 8,
            dense_units: vec![10, 32, 1],
            epochs: 300,
            batch_size: 8,
            learning_rate: 0.001,
            validation_fraction: 0.15,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-7,
            rng_seed: 0,
            input_layout: InputLayout::OneStepLookbackFeatures,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.look_back == 0 {
            return bad("look_back must be ≥ 1".into());
        }
        if self.hidden_size == 0 {
            return bad("hidden_size must be ≥ 1".into());
        }
        if self.dense_units.contains(&0) {
            return bad("dense layer sizes must be ≥ 1".into());
        }
        if self.dense_units.last().copied().unwrap_or(self.hidden_size) != 1 {
            return bad("the final layer must have exactly 1 unit".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be ≥ 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be ≥ 1".into());
        }
        for (name, v) in [
            ("validation_fraction", self.validation_fraction),
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.adam_epsilon > 0.0 && self.adam_epsilon.is_finite()) {
            return bad(format!(
                "adam_epsilon must be positive, got {}",
                self.adam_epsilon
            ));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

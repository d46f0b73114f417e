//! Pipeline configuration file (TOML, one section per stage).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AccSchema, Axis};
use crate::lstm::TrainConfig;
use crate::preprocess::PrepConfig;

/// Every key the config file understands, shown in each subcommand's `--help`.
pub const CONFIG_KEYS_HELP: &str = "\
CONFIG FILE KEYS (TOML; every flag overrides its key):
  [input]
    files = [\"...\"]             day files; relative paths resolve against the config file
    axes = [\"x\", \"y\", \"z\"]     axes to process                              (--axes)
  [schema]
    header_terminator = \"END OF HEADER\"   line closing the header
    time_column = 0             gps_time column
    sat_column = 1              satellite id column
    acc_columns = [2, 3, 4]     lin_acc x/y/z columns
    quality_flag_column = 11    optional; non-zero flags are marked, not dropped
  [preprocess]
    order = \"clean-first\"       clean-first | downsample-first                (--order)
    scaler = \"minmax\"           minmax | robust                               (--scaler)
    downsample_factor = 10      keep every Nth sample                         (--downsample-factor)
    downsample_mode = \"stride\"  stride | mean                                 (--downsample-mode)
    train_fraction = 0.7        leading fraction used for training            (--train-fraction)
  [train]
    look_back = 15              window length                                 (--look-back)
    hidden_size = 8             LSTM units
    dense_units = [10, 32, 1]   dense layer sizes, last must be 1
    epochs = 300                                                              (--epochs)
    batch_size = 8                                                            (--batch-size)
    learning_rate = 0.001                                                     (--learning-rate)
    validation_fraction = 0.15  trailing share of training pairs held out     (--validation-fraction)
    adam_beta1 = 0.9
    adam_beta2 = 0.999
    adam_epsilon = 1e-7
    rng_seed = 0                                                              (--seed)
    input_layout = \"one_step_lookback_features\"   or lookback_steps_one_feature (--input-layout)
  [output]
    dir = \"out\"                 output root                                   (--out-dir)
  [forecast]
    steps = 60                  recursive forecast length                     (--steps)
  jobs = 1                      parallel satellite/axis combinations          (--jobs)
";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub files: Vec<PathBuf>,
    pub axes: Vec<Axis>,
}

impl Default for InputSection {
    fn default() -> Self {
        InputSection {
            files: Vec::new(),
            axes: Axis::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSection {
    pub steps: usize,
}

impl Default for ForecastSection {
    fn default() -> Self {
        ForecastSection { steps: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputSection,
    pub schema: AccSchema,
    pub preprocess: PrepConfig,
    pub train: TrainConfig,
    pub output: OutputSection,
    pub forecast: ForecastSection,
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: InputSection::default(),
            schema: AccSchema::default(),
            preprocess: PrepConfig::default(),
            train: TrainConfig::default(),
            output: OutputSection::default(),
            forecast: ForecastSection::default(),
            jobs: 1,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a config file; relative input paths are resolved against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            for f in &mut cfg.input.files {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Preprocessing settings with the look-back taken from `[train]`.
    pub fn prep(&self) -> PrepConfig {
        PrepConfig {
            look_back: self.train.look_back,
            ..self.preprocess
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prep().validate()?;
        self.train.validate()?;
        if self.input.axes.is_empty() {
            return Err(Error::Config("at least one axis is required".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be ≥ 1".into()));
        }
        Ok(())
    }
}

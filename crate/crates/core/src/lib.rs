//! Forecasting and gap filling for daily 1 Hz three-axis satellite
//! accelerometer data with a small LSTM regressor written from scratch.
//!
//! The pipeline, module by module:
//!
//! - [`ingest`]: parse daily Level-1B style ASCII files and pick out one axis.
//! - [`preprocess`]: IQR outlier removal, min-max / robust scaling, decimation,
//!   the contiguous train/test split and look-back windowing.
//! - [`lstm`]: LSTM + dense stack, MSE/MAE, backpropagation through time, Adam
//!   and the training loop.
//! - [`forecast`]: RMSE in physical units, a persistence baseline and
//!   recursive multi-step forecasting for gap filling.
//! - [`report`]: CSV and SVG output (loss curves, prediction overlays, RMSE bars).
//! - [`cli`]: the `grace-acc` stage runner and its TOML config.
//!
//! Runnable walkthroughs of each capability live under `examples/`.

pub mod cli;
pub mod config;
pub mod error;
pub mod forecast;
pub mod ingest;
pub mod lstm;
pub mod preprocess;
pub mod report;
pub mod synth;

pub use error::{Error, Result};

//! Evaluation in physical units, the persistence baseline and recursive
//! multi-step forecasting used to fill data gaps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Axis, SatId};
use crate::lstm::{model_forward, predict, Checkpoint, ModelParams, TrainHistory};
use crate::preprocess::{ScalerParams, WindowedDataset};

/// Display scale of RMSE values: results are reported in units of 1e-6 m/s².
pub const RMSE_DISPLAY_UNIT: f64 = 1e-6;

/// Root mean square error.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    crate::lstm::mse(pred, truth).map(f64::sqrt)
}

/// Truth and model output over a contiguous stretch of the prepared series,
/// both in original units. `start_index` is the series position of the first
/// entry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionTrace {
    pub start_index: usize,
    pub truth: Vec<f64>,
    pub prediction: Vec<f64>,
}

/// Per satellite/axis scores, all RMSE values in m/s².
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub sat_id: SatId,
    pub axis: Axis,
    pub retained_count: usize,
    pub train_rmse: f64,
    pub test_rmse: f64,
    /// Persistence baseline on the test windows.
    pub baseline_rmse: f64,
    pub history: TrainHistory,
    pub train_trace: PredictionTrace,
    pub test_trace: PredictionTrace,
}

impl EvalReport {
    pub fn train_rmse_1e6(&self) -> f64 {
        self.train_rmse / RMSE_DISPLAY_UNIT
    }

    pub fn test_rmse_1e6(&self) -> f64 {
        self.test_rmse / RMSE_DISPLAY_UNIT
    }

    pub fn baseline_rmse_1e6(&self) -> f64 {
        self.baseline_rmse / RMSE_DISPLAY_UNIT
    }

    /// `A_x` style label used in file names.
    pub fn label(&self) -> String {
        format!("{}_{}", self.sat_id, self.axis)
    }
}

/// What [`evaluate`] cannot infer from the model and the data.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub sat_id: SatId,
    pub axis: Axis,
    pub retained_count: usize,
    pub history: TrainHistory,
}

fn trace(
    params: &ModelParams,
    ds: &WindowedDataset,
    scaler: &ScalerParams,
    start_index: usize,
) -> Result<PredictionTrace> {
    let pred = predict(params, ds)?;
    Ok(PredictionTrace {
        start_index,
        truth: scaler.invert(ds.y())?,
        prediction: scaler.invert(&pred)?,
    })
}

/// Scores a trained model on the train and test windows. Predictions and
/// targets are mapped back to physical units before the RMSE is taken.
pub fn evaluate(
    model: &Checkpoint,
    train_ds: &WindowedDataset,
    test_ds: &WindowedDataset,
    scaler: &ScalerParams,
    ctx: EvalContext,
) -> Result<EvalReport> {
    if let Some(trained_with) = &model.scaler {
        if trained_with != scaler {
            return Err(Error::ScalerMismatch);
        }
    }
    if train_ds.is_empty() || test_ds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let lb = model.params.look_back;
    let train_trace = trace(&model.params, train_ds, scaler, lb)?;
    let test_trace = trace(&model.params, test_ds, scaler, train_ds.len() + 2 * lb)?;
    Ok(EvalReport {
        sat_id: ctx.sat_id,
        axis: ctx.axis,
        retained_count: ctx.retained_count,
        train_rmse: rmse(&train_trace.prediction, &train_trace.truth)?,
        test_rmse: rmse(&test_trace.prediction, &test_trace.truth)?,
        baseline_rmse: persistence_baseline(test_ds, scaler)?,
        history: ctx.history,
        train_trace,
        test_trace,
    })
}

/// RMSE (original units) of predicting each target as the last value of its window.
pub fn persistence_baseline(ds: &WindowedDataset, scaler: &ScalerParams) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let last: Vec<f64> = ds.rows().map(|r| r[r.len() - 1]).collect();
    rmse(&scaler.invert(&last)?, &scaler.invert(ds.y())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    /// Scaled values the forecast was seeded with.
    pub seed_window: Vec<f64>,
    pub steps: usize,
    /// Forecast in scaled units.
    pub predicted_scaled: Vec<f64>,
    /// Forecast in original units.
    pub predicted: Vec<f64>,
}

/// Predicts one value, slides it into the window, repeats `steps` times.
/// Intermediate values are not clamped; the trajectory is mapped back to
/// original units once at the end.
pub fn recursive_forecast(
    params: &ModelParams,
    seed_window: &[f64],
    steps: usize,
    scaler: &ScalerParams,
) -> Result<ForecastResult> {
    if seed_window.len() != params.look_back {
        return Err(Error::BadWindowLength {
            expected: params.look_back,
            got: seed_window.len(),
        });
    }
    let mut window = seed_window.to_vec();
    let mut predicted_scaled = Vec::with_capacity(steps);
    for _ in 0..steps {
        let next = model_forward(params, &window)?[0];
        if !next.is_finite() {
            return Err(Error::NonFinite("recursive forecast diverged".into()));
        }
        predicted_scaled.push(next);
        window.remove(0);
        window.push(next);
    }
    let predicted = scaler.invert(&predicted_scaled)?;
    Ok(ForecastResult {
        seed_window: seed_window.to_vec(),
        steps,
        predicted_scaled,
        predicted,
    })
}

/// Fills a gap of `gap_len` samples that follows `before` (scaled values, at
/// least `look_back` long) by recursive forecasting from its tail.
pub fn fill_gap(
    params: &ModelParams,
    before: &[f64],
    gap_len: usize,
    scaler: &ScalerParams,
) -> Result<ForecastResult> {
    let lb = params.look_back;
    if before.len() < lb {
        return Err(Error::BadWindowLength {
            expected: lb,
            got: before.len(),
        });
    }
    recursive_forecast(params, &before[before.len() - lb..], gap_len, scaler)
}

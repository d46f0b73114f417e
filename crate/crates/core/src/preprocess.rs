//! Series preparation: IQR outlier removal, scaling, decimation, the
//! contiguous train/test split and look-back windowing.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{write_file, AxisSeries, Stage};

/// Fence multiplier applied to the interquartile range.
pub const IQR_FENCE: f64 = 1.5;

/// `p`-th percentile (0–100) of an ascending slice, interpolating linearly
/// between the order statistics around position `p·(n−1)/100`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty slice");
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quartiles, fences and what was dropped by [`remove_outliers`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub min_limit: f64,
    pub max_limit: f64,
    pub removed_indices: Vec<usize>,
    pub retained_count: usize,
}

impl OutlierReport {
    pub fn input_len(&self) -> usize {
        self.retained_count + self.removed_indices.len()
    }
}

/// Slice-level outlier filter: drops every value strictly outside
/// `[q1 − 1.5·iqr, q3 + 1.5·iqr]`, keeping order.
pub fn filter_outliers(values: &[f64]) -> Result<(Vec<f64>, OutlierReport)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sorted = sorted_copy(values);
    let q1 = percentile_sorted(&sorted, 25.0);
    let q3 = percentile_sorted(&sorted, 75.0);
    let iqr = q3 - q1;
    let max_limit = q3 + IQR_FENCE * iqr;
    let min_limit = q1 - IQR_FENCE * iqr;

    let mut kept = Vec::with_capacity(values.len());
    let mut removed_indices = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if v > max_limit || v < min_limit {
            removed_indices.push(i);
        } else {
            kept.push(v);
        }
    }
    let report = OutlierReport {
        q1,
        q3,
        iqr,
        min_limit,
        max_limit,
        removed_indices,
        retained_count: kept.len(),
    };
    Ok((kept, report))
}

pub fn remove_outliers(series: &AxisSeries) -> Result<(AxisSeries, OutlierReport)> {
    let (kept, report) = filter_outliers(series.values())?;
    let cleaned = series.advance(Stage::Cleaned, kept, series.sample_interval_s())?;
    Ok((cleaned, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalerKind {
    #[default]
    MinMax,
    Robust,
}

impl fmt::Display for ScalerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalerKind::MinMax => "minmax",
            ScalerKind::Robust => "robust",
        })
    }
}

impl FromStr for ScalerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "minmax" | "min-max" => Ok(ScalerKind::MinMax),
            "robust" => Ok(ScalerKind::Robust),
            other => Err(format!(
                "unknown scaler `{other}` (expected minmax or robust)"
            )),
        }
    }
}

/// Fitted affine normalisation. Min-max maps onto `[0, 1]`; robust subtracts
/// the median and divides by the IQR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScalerParams {
    MinMax { data_min: f64, data_max: f64 },
    Robust { center: f64, scale: f64 },
}

impl ScalerParams {
    pub fn kind(&self) -> ScalerKind {
        match self {
            ScalerParams::MinMax { .. } => ScalerKind::MinMax,
            ScalerParams::Robust { .. } => ScalerKind::Robust,
        }
    }

    /// Zero range (min-max) or zero IQR (robust).
    pub fn is_degenerate(&self) -> bool {
        self.offset_and_span().1 == 0.0
    }

    /// `(offset, span)` such that `scaled = (v − offset) / span`.
    fn offset_and_span(&self) -> (f64, f64) {
        match *self {
            ScalerParams::MinMax { data_min, data_max } => (data_min, data_max - data_min),
            ScalerParams::Robust { center, scale } => (center, scale),
        }
    }

    /// Original-unit size of one scaled unit.
    pub fn span(&self) -> f64 {
        self.offset_and_span().1
    }

    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        let (offset, span) = self.offset_and_span();
        if span == 0.0 {
            return Err(Error::DegenerateScale);
        }
        Ok(values.iter().map(|v| (v - offset) / span).collect())
    }

    pub fn invert(&self, values: &[f64]) -> Result<Vec<f64>> {
        let (offset, span) = self.offset_and_span();
        if span == 0.0 {
            return Err(Error::DegenerateScale);
        }
        Ok(values.iter().map(|v| v * span + offset).collect())
    }
}

pub fn fit_scaler_values(values: &[f64], kind: ScalerKind) -> Result<ScalerParams> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(match kind {
        ScalerKind::MinMax => {
            let data_min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let data_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ScalerParams::MinMax { data_min, data_max }
        }
        ScalerKind::Robust => {
            let sorted = sorted_copy(values);
            let q1 = percentile_sorted(&sorted, 25.0);
            let q3 = percentile_sorted(&sorted, 75.0);
            ScalerParams::Robust {
                center: percentile_sorted(&sorted, 50.0),
                scale: q3 - q1,
            }
        }
    })
}

pub fn fit_scaler(series: &AxisSeries, kind: ScalerKind) -> Result<ScalerParams> {
    fit_scaler_values(series.values(), kind)
}

pub fn transform(series: &AxisSeries, params: &ScalerParams) -> Result<AxisSeries> {
    let scaled = params.apply(series.values())?;
    series.advance(Stage::Scaled, scaled, series.sample_interval_s())
}

pub fn inverse_transform(series: &AxisSeries, params: &ScalerParams) -> Result<AxisSeries> {
    let restored = params.invert(series.values())?;
    series.retreat(Stage::Scaled, restored)
}

/// How [`downsample_with`] reduces each block of `factor` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DownsampleMode {
    /// Keep the first sample of every block.
    #[default]
    Stride,
    /// Average each block; the trailing partial block is averaged over what it holds.
    Mean,
}

impl FromStr for DownsampleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stride" => Ok(DownsampleMode::Stride),
            "mean" => Ok(DownsampleMode::Mean),
            other => Err(format!(
                "unknown downsample mode `{other}` (expected stride or mean)"
            )),
        }
    }
}

pub fn downsample_values(values: &[f64], factor: usize, mode: DownsampleMode) -> Result<Vec<f64>> {
    if factor == 0 {
        return Err(Error::Config("downsample factor must be ≥ 1".into()));
    }
    Ok(match mode {
        DownsampleMode::Stride => values.iter().step_by(factor).copied().collect(),
        DownsampleMode::Mean => values
            .chunks(factor)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect(),
    })
}

/// Strided decimation keeping indices `0, factor, 2·factor, …`.
pub fn downsample(series: &AxisSeries, factor: usize) -> Result<AxisSeries> {
    downsample_with(series, factor, DownsampleMode::Stride)
}

pub fn downsample_with(
    series: &AxisSeries,
    factor: usize,
    mode: DownsampleMode,
) -> Result<AxisSeries> {
    let values = downsample_values(series.values(), factor, mode)?;
    series.advance(
        Stage::Downsampled,
        values,
        series.sample_interval_s() * factor as f64,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.70,
        }
    }
}

impl SplitSpec {
    pub fn new(train_fraction: f64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec { train_fraction })
    }

    /// `floor(train_fraction · len)`; the tiny bias absorbs representation error
    /// in products such as `0.7 · 10`.
    pub fn split_index(&self, len: usize) -> usize {
        ((self.train_fraction * len as f64) + 1e-9).floor() as usize
    }
}

/// Contiguous, unshuffled split into `(train, test)`.
pub fn split(series: &AxisSeries, spec: SplitSpec) -> Result<(AxisSeries, AxisSeries)> {
    let n = series.len();
    if n < 2 {
        return Err(Error::TooShort {
            len: n,
            reason: "a split needs at least 2 values".into(),
        });
    }
    let at = spec.split_index(n);
    if at == 0 || at == n {
        return Err(Error::TooShort {
            len: n,
            reason: format!(
                "train fraction {} leaves one side empty",
                spec.train_fraction
            ),
        });
    }
    let (a, b) = series.values().split_at(at);
    Ok((
        series.with_values(a.to_vec())?,
        series.with_values(b.to_vec())?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Train,
    Test,
}

/// Sliding look-back windows: `x[i][j] = source[i + j]`, `y[i] = source[i + look_back]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub look_back: usize,
    /// Row-major `n_pairs × look_back`.
    x: Vec<f64>,
    y: Vec<f64>,
    pub origin: Origin,
}

impl WindowedDataset {
    pub fn from_rows(look_back: usize, x: Vec<f64>, y: Vec<f64>, origin: Origin) -> Result<Self> {
        if look_back == 0 || x.len() != y.len() * look_back {
            return Err(Error::ShapeMismatch {
                expected: format!("{} × {}", y.len(), look_back),
                got: format!("{} values", x.len()),
            });
        }
        Ok(WindowedDataset {
            look_back,
            x,
            y,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.look_back..(i + 1) * self.look_back]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.look_back)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

pub fn create_dataset_values(
    values: &[f64],
    look_back: usize,
    origin: Origin,
) -> Result<WindowedDataset> {
    if look_back == 0 {
        return Err(Error::Config("look_back must be ≥ 1".into()));
    }
    let n_pairs = values.len().saturating_sub(look_back);
    let mut x = Vec::with_capacity(n_pairs * look_back);
    let mut y = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        x.extend_from_slice(&values[i..i + look_back]);
        y.push(values[i + look_back]);
    }
    Ok(WindowedDataset {
        look_back,
        x,
        y,
        origin,
    })
}

pub fn create_dataset(
    series: &AxisSeries,
    look_back: usize,
    origin: Origin,
) -> Result<WindowedDataset> {
    create_dataset_values(series.values(), look_back, origin)
}

/// Whether outliers are removed before or after decimation. Scaling always
/// directly follows outlier removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineOrder {
    /// clean → scale → downsample
    #[default]
    CleanFirst,
    /// downsample → clean → scale
    DownsampleFirst,
}

impl fmt::Display for PipelineOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineOrder::CleanFirst => "clean-first",
            PipelineOrder::DownsampleFirst => "downsample-first",
        })
    }
}

impl FromStr for PipelineOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "clean-first" => Ok(PipelineOrder::CleanFirst),
            "downsample-first" => Ok(PipelineOrder::DownsampleFirst),
            other => Err(format!(
                "unknown pipeline order `{other}` (expected clean-first or downsample-first)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepConfig {
    pub order: PipelineOrder,
    pub scaler: ScalerKind,
    pub downsample_factor: usize,
    pub downsample_mode: DownsampleMode,
    pub train_fraction: f64,
    /// Window length; configured under `[train]` in pipeline config files.
    #[serde(skip, default = "default_look_back")]
    pub look_back: usize,
}

fn default_look_back() -> usize {
    15
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            order: PipelineOrder::CleanFirst,
            scaler: ScalerKind::MinMax,
            downsample_factor: 10,
            downsample_mode: DownsampleMode::Stride,
            train_fraction: 0.70,
            look_back: 15,
        }
    }
}

impl PrepConfig {
    pub fn validate(&self) -> Result<()> {
        SplitSpec::new(self.train_fraction)?;
        if self.downsample_factor == 0 {
            return Err(Error::Config("downsample_factor must be ≥ 1".into()));
        }
        if self.look_back == 0 {
            return Err(Error::Config("look_back must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Everything produced by [`prepare_axis`], stage by stage.
#[derive(Debug, Clone)]
pub struct PreparedAxis {
    pub cleaned: AxisSeries,
    pub scaled: AxisSeries,
    pub downsampled: AxisSeries,
    /// The fully prepared series (scaled, cleaned and downsampled in configured order).
    pub prepared: AxisSeries,
    pub outliers: OutlierReport,
    pub scaler: ScalerParams,
    pub train: AxisSeries,
    pub test: AxisSeries,
    pub train_ds: WindowedDataset,
    pub test_ds: WindowedDataset,
}

/// Runs the full chain on one raw axis. The scaler is fitted on the whole
/// cleaned series before the split.
pub fn prepare_axis(raw: &AxisSeries, cfg: &PrepConfig) -> Result<PreparedAxis> {
    cfg.validate()?;
    let ds = |s: &AxisSeries| downsample_with(s, cfg.downsample_factor, cfg.downsample_mode);
    let (cleaned, scaled, downsampled, prepared, outliers, scaler) = match cfg.order {
        PipelineOrder::CleanFirst => {
            let (cleaned, outliers) = remove_outliers(raw)?;
            let scaler = fit_scaler(&cleaned, cfg.scaler)?;
            let scaled = transform(&cleaned, &scaler)?;
            let downsampled = ds(&scaled)?;
            (
                cleaned,
                scaled,
                downsampled.clone(),
                downsampled,
                outliers,
                scaler,
            )
        }
        PipelineOrder::DownsampleFirst => {
            let downsampled = ds(raw)?;
            let (cleaned, outliers) = remove_outliers(&downsampled)?;
            let scaler = fit_scaler(&cleaned, cfg.scaler)?;
            let scaled = transform(&cleaned, &scaler)?;
            (
                cleaned,
                scaled.clone(),
                downsampled,
                scaled,
                outliers,
                scaler,
            )
        }
    };
    let (train, test) = split(&prepared, SplitSpec::new(cfg.train_fraction)?)?;
    let train_ds = create_dataset(&train, cfg.look_back, Origin::Train)?;
    let test_ds = create_dataset(&test, cfg.look_back, Origin::Test)?;
    Ok(PreparedAxis {
        cleaned,
        scaled,
        downsampled,
        prepared,
        outliers,
        scaler,
        train,
        test,
        train_ds,
        test_ds,
    })
}

/// Writes `index,value` rows with round-trip exact float formatting.
pub fn write_series_csv(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    let mut buf = String::with_capacity(values.len() * 24 + 16);
    buf.push_str("index,value\n");
    for (i, v) in values.iter().enumerate() {
        buf.push_str(&format!("{i},{v:e}\n"));
    }
    write_file(path.as_ref(), buf.as_bytes())
}

pub fn read_series_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let value = line
            .split(',')
            .nth(1)
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::MalformedRecord {
                path: path.to_path_buf(),
                line_no: n + 1,
                reason: "expected `index,value`".into(),
            })?;
        out.push(value);
    }
    Ok(out)
}

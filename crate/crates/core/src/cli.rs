//! The `grace-acc` command line: one subcommand per pipeline stage plus
//! `run-all`. Stages talk to each other only through files under the output
//! directory, so any of them can be rerun alone:
//!
//! ```text
//! <out>/ingest/<sat>_<date>.csv
//! <out>/preprocess/<sat>_<date>_<axis>/{cleaned,scaled,downsampled,train,test}.csv
//!                                      {outliers,scaler,meta}.json
//! <out>/train/<sat>_<date>_<axis>/{model.json,history.csv}
//! <out>/report/<date>/...             (see `report::emit_report`) + rmse_scores.csv
//! <out>/forecast/<sat>_<date>_<axis>.csv
//! ```
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, CONFIG_KEYS_HELP};
use crate::error::{Error, Result};
use crate::forecast::{evaluate, fill_gap, EvalContext, EvalReport};
use crate::ingest::{extract_axis, parse_acc1b, write_file, Axis, AxisSeries, SatId, Stage};
use crate::lstm::{fit, Checkpoint, InputLayout, TrainHistory};
use crate::preprocess::{
    create_dataset_values, prepare_axis, read_series_csv, write_series_csv, DownsampleMode, Origin,
    PipelineOrder, ScalerKind, ScalerParams,
};
use crate::report::{emit_report, forecast_csv, write_rmse_table, RMSE_TABLE_FILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "grace-acc",
    version,
    about = "LSTM forecasting and gap filling for daily accelerometer files"
)]
struct Cli {
    /// Pipeline config file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed for initialisation and shuffling (train.rng_seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root (output.dir)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Parallel satellite/axis combinations (jobs)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse day files and dump them as CSV
    #[command(after_help = CONFIG_KEYS_HELP)]
    Ingest(Overrides),
    /// Clean, scale, downsample, split; writes staged series and outlier summaries
    #[command(after_help = CONFIG_KEYS_HELP)]
    Preprocess(Overrides),
    /// Train one model per satellite/axis; writes checkpoints and loss histories
    #[command(after_help = CONFIG_KEYS_HELP)]
    Train(Overrides),
    /// Score trained models and write RMSE tables, CSVs and SVG plots
    #[command(after_help = CONFIG_KEYS_HELP)]
    Evaluate(Overrides),
    /// Recursively forecast past the end of each prepared series
    #[command(after_help = CONFIG_KEYS_HELP)]
    Forecast(Overrides),
    /// ingest → preprocess → train → evaluate → forecast
    #[command(after_help = CONFIG_KEYS_HELP)]
    RunAll(Overrides),
}

/// Flags that override config keys.
#[derive(Debug, Args, Default)]
struct Overrides {
    /// Day files (input.files)
    files: Vec<PathBuf>,
    /// Comma-separated axes, e.g. x,y,z (input.axes)
    #[arg(long, value_delimiter = ',')]
    axes: Option<Vec<Axis>>,
    /// clean-first | downsample-first (preprocess.order)
    #[arg(long)]
    order: Option<PipelineOrder>,
    /// minmax | robust (preprocess.scaler)
    #[arg(long)]
    scaler: Option<ScalerKind>,
    /// preprocess.downsample_factor
    #[arg(long)]
    downsample_factor: Option<usize>,
    /// stride | mean (preprocess.downsample_mode)
    #[arg(long)]
    downsample_mode: Option<DownsampleMode>,
    /// preprocess.train_fraction
    #[arg(long)]
    train_fraction: Option<f64>,
    /// train.look_back
    #[arg(long)]
    look_back: Option<usize>,
    /// train.epochs
    #[arg(long)]
    epochs: Option<usize>,
    /// train.batch_size
    #[arg(long)]
    batch_size: Option<usize>,
    /// train.learning_rate
    #[arg(long)]
    learning_rate: Option<f64>,
    /// train.validation_fraction
    #[arg(long)]
    validation_fraction: Option<f64>,
    /// one_step_lookback_features | lookback_steps_one_feature (train.input_layout)
    #[arg(long)]
    input_layout: Option<InputLayout>,
    /// forecast.steps
    #[arg(long)]
    steps: Option<usize>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        Error::NonFinite(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn resolve_config(cli: &Cli, o: &Overrides) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if !o.files.is_empty() {
        cfg.input.files = o.files.clone();
    }
    if let Some(v) = &o.axes {
        cfg.input.axes = v.clone();
    }
    if let Some(v) = o.order {
        cfg.preprocess.order = v;
    }
    if let Some(v) = o.scaler {
        cfg.preprocess.scaler = v;
    }
    if let Some(v) = o.downsample_factor {
        cfg.preprocess.downsample_factor = v;
    }
    if let Some(v) = o.downsample_mode {
        cfg.preprocess.downsample_mode = v;
    }
    if let Some(v) = o.train_fraction {
        cfg.preprocess.train_fraction = v;
    }
    if let Some(v) = o.look_back {
        cfg.train.look_back = v;
    }
    if let Some(v) = o.epochs {
        cfg.train.epochs = v;
    }
    if let Some(v) = o.batch_size {
        cfg.train.batch_size = v;
    }
    if let Some(v) = o.learning_rate {
        cfg.train.learning_rate = v;
    }
    if let Some(v) = o.validation_fraction {
        cfg.train.validation_fraction = v;
    }
    if let Some(v) = o.input_layout {
        cfg.train.input_layout = v;
    }
    if let Some(v) = o.steps {
        cfg.forecast.steps = v;
    }
    if let Some(v) = cli.seed {
        cfg.train.rng_seed = v;
    }
    if let Some(v) = &cli.out_dir {
        cfg.output.dir = v.clone();
    }
    if let Some(v) = cli.jobs {
        cfg.jobs = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let (o, stage) = match &cli.command {
        Command::Ingest(o) => (o, "ingest"),
        Command::Preprocess(o) => (o, "preprocess"),
        Command::Train(o) => (o, "train"),
        Command::Evaluate(o) => (o, "evaluate"),
        Command::Forecast(o) => (o, "forecast"),
        Command::RunAll(o) => (o, "run-all"),
    };
    let cfg = resolve_config(&cli, o)?;
    match stage {
        "ingest" => cmd_ingest(&cfg),
        "preprocess" => cmd_preprocess(&cfg),
        "train" => cmd_train(&cfg),
        "evaluate" => cmd_evaluate(&cfg),
        "forecast" => cmd_forecast(&cfg),
        _ => cmd_run_all(&cfg),
    }
}

fn require_files(cfg: &PipelineConfig) -> Result<()> {
    if cfg.input.files.is_empty() {
        return Err(Error::Config(
            "no input files given (positional FILES or input.files)".into(),
        ));
    }
    Ok(())
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Parses every input file and writes `ingest/<sat>_<date>.csv`.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<()> {
    require_files(cfg)?;
    for path in &cfg.input.files {
        let day = parse_acc1b(path, &cfg.schema)?;
        let out = cfg
            .output
            .dir
            .join("ingest")
            .join(format!("{}.csv", day.label()));
        day.write_csv(&out)?;
        println!(
            "{}: {} samples ({} flagged) -> {}",
            day.label(),
            day.samples.len(),
            day.flagged_count(),
            out.display()
        );
    }
    Ok(())
}

/// Provenance of one prepared series, kept next to the staged CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub sat_id: SatId,
    pub axis: Axis,
    pub date: String,
    pub raw_len: usize,
    /// Samples surviving outlier removal, counted at the stage where removal ran.
    pub retained_count: usize,
    /// Length after every preparation step; the count a model sees.
    pub prepared_len: usize,
    pub train_len: usize,
    pub test_len: usize,
    pub sample_interval_s: f64,
    pub provenance: Vec<Stage>,
    pub order: PipelineOrder,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| Error::Checkpoint(e.to_string()))?;
    s.push('\n');
    write_file(path, s.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedRecord {
        path: path.to_path_buf(),
        line_no: e.line(),
        reason: e.to_string(),
    })
}

/// Runs the preparation chain for every file × axis.
pub fn cmd_preprocess(cfg: &PipelineConfig) -> Result<()> {
    require_files(cfg)?;
    let prep = cfg.prep();
    let mut jobs = Vec::new();
    for path in &cfg.input.files {
        let day = parse_acc1b(path, &cfg.schema)?;
        for &axis in &cfg.input.axes {
            jobs.push((day.label(), day.date.to_string(), extract_axis(&day, axis)?));
        }
    }
    let root = cfg.output.dir.join("preprocess");
    let results: Vec<Result<String>> = with_pool(cfg.jobs, || {
        jobs.par_iter()
            .map(|(label, date, raw)| {
                let p = prepare_axis(raw, &prep)?;
                let dir = root.join(format!("{label}_{}", raw.axis));
                write_series_csv(dir.join("cleaned.csv"), p.cleaned.values())?;
                write_series_csv(dir.join("scaled.csv"), p.scaled.values())?;
                write_series_csv(dir.join("downsampled.csv"), p.downsampled.values())?;
                write_series_csv(dir.join("train.csv"), p.train.values())?;
                write_series_csv(dir.join("test.csv"), p.test.values())?;
                write_json(&dir.join("outliers.json"), &p.outliers)?;
                write_json(&dir.join("scaler.json"), &p.scaler)?;
                let meta = SeriesMeta {
                    sat_id: raw.sat_id,
                    axis: raw.axis,
                    date: date.clone(),
                    raw_len: raw.len(),
                    retained_count: p.outliers.retained_count,
                    prepared_len: p.prepared.len(),
                    train_len: p.train.len(),
                    test_len: p.test.len(),
                    sample_interval_s: p.prepared.sample_interval_s(),
                    provenance: p.prepared.provenance().to_vec(),
                    order: prep.order,
                };
                write_json(&dir.join("meta.json"), &meta)?;
                Ok(format!(
                    "{label} {}: raw {}, downsampled {}, retained {} (q1 {:e}, q3 {:e}, removed {}), prepared {}, train {}, test {}",
                    raw.axis,
                    raw.len(),
                    p.downsampled.len(),
                    p.outliers.retained_count,
                    p.outliers.q1,
                    p.outliers.q3,
                    p.outliers.removed_indices.len(),
                    p.prepared.len(),
                    p.train.len(),
                    p.test.len()
                ))
            })
            .collect()
    })?;
    for r in results {
        println!("{}", r?);
    }
    Ok(())
}

/// A prepared series found under `<out>/preprocess`.
#[derive(Debug, Clone)]
pub struct Staged {
    pub name: String,
    pub dir: PathBuf,
    pub meta: SeriesMeta,
}

impl Staged {
    pub fn train_dir(&self, out: &Path) -> PathBuf {
        out.join("train").join(&self.name)
    }
}

/// Lists prepared series (sorted by name) restricted to the configured axes.
pub fn staged_series(cfg: &PipelineConfig) -> Result<Vec<Staged>> {
    let root = cfg.output.dir.join("preprocess");
    let entries = fs::read_dir(&root).map_err(|e| Error::io(&root, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(&root, e))?;
        let dir = entry.path();
        let meta_path = dir.join("meta.json");
        if !meta_path.is_file() {
            continue;
        }
        let meta: SeriesMeta = read_json(&meta_path)?;
        if !cfg.input.axes.contains(&meta.axis) {
            continue;
        }
        out.push(Staged {
            name: entry.file_name().to_string_lossy().into_owned(),
            dir,
            meta,
        });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    if out.is_empty() {
        return Err(Error::NoRecords { path: root });
    }
    Ok(out)
}

fn load_staged_series(s: &Staged, file: &str) -> Result<AxisSeries> {
    let values = read_series_csv(s.dir.join(file))?;
    AxisSeries::from_parts(
        s.meta.sat_id,
        s.meta.axis,
        values,
        s.meta.sample_interval_s,
        s.meta.provenance.clone(),
    )
}

/// Trains one model per prepared series.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<()> {
    let staged = staged_series(cfg)?;
    let out = &cfg.output.dir;
    let results: Vec<Result<String>> = with_pool(cfg.jobs, || {
        staged
            .par_iter()
            .map(|s| {
                let train = load_staged_series(s, "train.csv")?;
                let scaler: ScalerParams = read_json(&s.dir.join("scaler.json"))?;
                let ds = create_dataset_values(train.values(), cfg.train.look_back, Origin::Train)?;
                let (params, history) = fit(&ds, &cfg.train)?;
                let dir = s.train_dir(out);
                Checkpoint::new(cfg.train.clone(), Some(scaler), params).save(dir.join("model.json"))?;
                history.write_csv(dir.join("history.csv"))?;
                let last = history.epochs.last().expect("epochs ≥ 1");
                Ok(format!(
                    "{}: {} pairs, {} epochs, loss {:.3e}, val_loss {:.3e}, mae {:.3e}, val_mae {:.3e}",
                    s.name,
                    ds.len(),
                    history.len(),
                    last.loss,
                    last.val_loss,
                    last.mae,
                    last.val_mae
                ))
            })
            .collect()
    })?;
    for r in results {
        println!("{}", r?);
    }
    Ok(())
}

fn evaluate_staged(cfg: &PipelineConfig, s: &Staged) -> Result<EvalReport> {
    let dir = s.train_dir(&cfg.output.dir);
    let model = Checkpoint::load(dir.join("model.json"))?;
    let history = TrainHistory::read_csv(dir.join("history.csv"))?;
    let scaler: ScalerParams = read_json(&s.dir.join("scaler.json"))?;
    let lb = cfg.train.look_back;
    let train = create_dataset_values(
        load_staged_series(s, "train.csv")?.values(),
        lb,
        Origin::Train,
    )?;
    let test = create_dataset_values(
        load_staged_series(s, "test.csv")?.values(),
        lb,
        Origin::Test,
    )?;
    if model.params.look_back != lb {
        return Err(Error::ShapeMismatch {
            expected: format!("look_back {}", model.params.look_back),
            got: format!("look_back {lb}"),
        });
    }
    evaluate(
        &model,
        &train,
        &test,
        &scaler,
        EvalContext {
            sat_id: s.meta.sat_id,
            axis: s.meta.axis,
            retained_count: s.meta.prepared_len,
            history,
        },
    )
}

/// Scores every trained model and writes per-date report directories.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<()> {
    let staged = staged_series(cfg)?;
    let results: Vec<Result<EvalReport>> = with_pool(cfg.jobs, || {
        staged.par_iter().map(|s| evaluate_staged(cfg, s)).collect()
    })?;
    let mut by_date: BTreeMap<String, Vec<EvalReport>> = BTreeMap::new();
    for (s, r) in staged.iter().zip(results) {
        let r = r?;
        println!(
            "{}: retained {}, RMSE train {:.3} test {:.3} persistence {:.3} (1e-6 m/s²)",
            s.name,
            r.retained_count,
            r.train_rmse_1e6(),
            r.test_rmse_1e6(),
            r.baseline_rmse_1e6()
        );
        by_date.entry(s.meta.date.clone()).or_default().push(r);
    }
    for (date, reports) in &by_date {
        let dir = cfg.output.dir.join("report").join(date);
        let files = emit_report(reports, &dir)?;
        write_rmse_table(reports, dir.join(RMSE_TABLE_FILE))?;
        println!(
            "{date}: {} report files in {}",
            files.len() + 1,
            dir.display()
        );
    }
    Ok(())
}

/// Forecasts `forecast.steps` values past the end of each prepared series.
pub fn cmd_forecast(cfg: &PipelineConfig) -> Result<()> {
    let staged = staged_series(cfg)?;
    for s in &staged {
        let model = Checkpoint::load(s.train_dir(&cfg.output.dir).join("model.json"))?;
        if model.params.look_back != cfg.train.look_back {
            return Err(Error::ShapeMismatch {
                expected: format!("look_back {}", model.params.look_back),
                got: format!("look_back {}", cfg.train.look_back),
            });
        }
        let scaler: ScalerParams = read_json(&s.dir.join("scaler.json"))?;
        let mut series = load_staged_series(s, "train.csv")?.into_values();
        series.extend(load_staged_series(s, "test.csv")?.into_values());
        let result = fill_gap(&model.params, &series, cfg.forecast.steps, &scaler)?;
        let path = cfg
            .output
            .dir
            .join("forecast")
            .join(format!("{}.csv", s.name));
        write_file(&path, forecast_csv(&result).as_bytes())?;
        println!("{}: {} steps -> {}", s.name, result.steps, path.display());
    }
    Ok(())
}

pub fn cmd_run_all(cfg: &PipelineConfig) -> Result<()> {
    cmd_ingest(cfg)?;
    cmd_preprocess(cfg)?;
    cmd_train(cfg)?;
    cmd_evaluate(cfg)?;
    cmd_forecast(cfg)
}

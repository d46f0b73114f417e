//! Cuts a gap out of a prepared synthetic axis, trains on the data before it
//! and fills the gap by recursive forecasting.
//!
//! cargo run --release --example gap_filling -- [gap_len] [epochs]

use chrono::NaiveDate;
use grace_acc::forecast::{fill_gap, rmse};
use grace_acc::ingest::{extract_axis, Axis, SatId};
use grace_acc::lstm::{fit, TrainConfig};
use grace_acc::preprocess::{create_dataset_values, prepare_axis, Origin, PrepConfig};
use grace_acc::synth::SyntheticDay;

fn main() -> grace_acc::Result<()> {
    let mut args = std::env::args().skip(1);
    let gap_len: usize = args
        .next()
        .map(|s| s.parse().expect("gap_len"))
        .unwrap_or(30);
    let epochs: usize = args
        .next()
        .map(|s| s.parse().expect("epochs"))
        .unwrap_or(40);

    let date = NaiveDate::from_ymd_opt(2005, 5, 30).unwrap();
    let day = SyntheticDay::new(SatId::A, date, 3).generate();
    let prepared = prepare_axis(&extract_axis(&day, Axis::X)?, &PrepConfig::default())?;
    let values = prepared.prepared.values();
    let gap_start = values.len() / 2;
    let before = &values[..gap_start];
    let truth = &values[gap_start..gap_start + gap_len];

    let cfg = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    let ds = create_dataset_values(before, cfg.look_back, Origin::Train)?;
    let (params, _) = fit(&ds, &cfg)?;
    let filled = fill_gap(&params, before, gap_len, &prepared.scaler)?;
    let truth_si = prepared.scaler.invert(truth)?;
    let hold = vec![*before.last().unwrap(); gap_len];
    println!(
        "gap of {gap_len} samples ({} s): RMSE {:.3e} m/s², hold-last-value RMSE {:.3e} m/s²",
        gap_len as f64 * prepared.prepared.sample_interval_s(),
        rmse(&filled.predicted, &truth_si)?,
        rmse(&prepared.scaler.invert(&hold)?, &truth_si)?
    );
    for k in (0..gap_len).step_by((gap_len / 6).max(1)) {
        println!(
            "   +{:>3}: filled {:+.4e}  truth {:+.4e}",
            k + 1,
            filled.predicted[k],
            truth_si[k]
        );
    }
    Ok(())
}

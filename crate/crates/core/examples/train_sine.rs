//! Trains the default network on a noiseless sine wave, then forecasts the
//! first 20 test points recursively.
//!
//! cargo run --release --example train_sine -- [epochs] [period]

use grace_acc::forecast::{recursive_forecast, rmse};
use grace_acc::lstm::{fit, TrainConfig};
use grace_acc::preprocess::{
    create_dataset_values, fit_scaler_values, Origin, ScalerKind, SplitSpec,
};
use grace_acc::synth::sine_series;

fn main() -> grace_acc::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args
        .next()
        .map(|s| s.parse().expect("epochs"))
        .unwrap_or(50);
    let period: f64 = args
        .next()
        .map(|s| s.parse().expect("period"))
        .unwrap_or(50.0);

    let raw = sine_series(1000, period);
    let scaler = fit_scaler_values(&raw, ScalerKind::MinMax)?;
    let scaled = scaler.apply(&raw)?;
    let cut = SplitSpec::new(0.7)?.split_index(scaled.len());
    let (train, test) = scaled.split_at(cut);

    let cfg = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    let ds = create_dataset_values(train, cfg.look_back, Origin::Train)?;
    let (params, history) = fit(&ds, &cfg)?;
    let first = history.epochs.first().unwrap().loss;
    let last = history.epochs.last().unwrap().loss;
    println!(
        "train MSE: epoch 1 {first:.3e}, epoch {epochs} {last:.3e} ({:.1}x lower)",
        first / last
    );

    let seed = &train[train.len() - cfg.look_back..];
    let fc = recursive_forecast(&params, seed, 20, &scaler)?;
    let err = rmse(&fc.predicted_scaled, &test[..20])?;
    println!("20-step recursive forecast RMSE (scaled): {err:.4}");
    for (k, (p, t)) in fc.predicted_scaled.iter().zip(test).enumerate().step_by(5) {
        println!("  step {:>2}: predicted {p:.4}  truth {t:.4}", k + 1);
    }
    Ok(())
}

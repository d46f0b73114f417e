mod common;

use grace_acc::lstm::{fit, init_params, model_forward, Checkpoint, InputLayout, TrainConfig};
use grace_acc::preprocess::{create_dataset_values, Origin, ScalerParams};
use grace_acc::synth::sine_series;
use grace_acc::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn batch(seed: u64, n: usize, look_back: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..n * look_back).map(|_| rng.random()).collect();
    let y = (0..n).map(|_| rng.random()).collect();
    (x, y)
}

#[test]
fn gradients_match_finite_differences() {
    for layout in [
        InputLayout::OneStepLookbackFeatures,
        InputLayout::LookbackStepsOneFeature,
    ] {
        let cfg = TrainConfig {
            input_layout: layout,
            ..TrainConfig::default()
        };
        let params = init_params(&cfg, 42).unwrap();
        let (x, y) = batch(7, 3, cfg.look_back);
        let err = common::max_gradient_error(&params, &x, &y);
        assert!(err <= 1e-4, "{layout:?}: {err:e}");
    }
}

#[test]
fn gradients_with_short_window_and_wide_hidden_layer() {
    let cfg = TrainConfig {
        look_back: 4,
        hidden_size: 5,
        dense_units: vec![3, 1],
        input_layout: InputLayout::LookbackStepsOneFeature,
        ..TrainConfig::default()
    };
    let params = init_params(&cfg, 3).unwrap();
    let (x, y) = batch(1, 5, 4);
    assert!(common::max_gradient_error(&params, &x, &y) <= 1e-4);
}

#[test]
fn training_is_deterministic_per_seed() {
    let ds = create_dataset_values(&sine_series(200, 40.0), 15, Origin::Train).unwrap();
    let cfg = TrainConfig {
        epochs: 3,
        ..TrainConfig::default()
    };
    let (a, ha) = fit(&ds, &cfg).unwrap();
    let (b, hb) = fit(&ds, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ha, hb);
    let (c, _) = fit(&ds, &TrainConfig { rng_seed: 1, ..cfg }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn history_has_one_row_per_epoch() {
    let ds = create_dataset_values(&sine_series(120, 30.0), 15, Origin::Train).unwrap();
    let (_, h) = fit(
        &ds,
        &TrainConfig {
            epochs: 4,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    assert_eq!(h.len(), 4);
    let csv = h.to_csv();
    assert!(csv.starts_with("epoch,loss,mae,val_loss,val_mae\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn zero_epochs_rejected() {
    let ds = create_dataset_values(&sine_series(100, 30.0), 15, Origin::Train).unwrap();
    let err = fit(
        &ds,
        &TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn exploding_targets_surface_as_non_finite() {
    let values: Vec<f64> = (0..80)
        .map(|i| if i % 2 == 0 { 1e200 } else { -1e200 })
        .collect();
    let ds = create_dataset_values(&values, 15, Origin::Train).unwrap();
    let err = fit(
        &ds,
        &TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, Error::NonFinite(_)), "{err}");
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let cfg = TrainConfig::default();
    let params = init_params(&cfg, 9).unwrap();
    let scaler = ScalerParams::MinMax {
        data_min: -3e-6,
        data_max: 4e-6,
    };
    let ck = Checkpoint::new(cfg, Some(scaler), params);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    ck.save(&path).unwrap();
    let back = Checkpoint::load(&path).unwrap();
    assert_eq!(back, ck);
    let (x, _) = batch(2, 4, 15);
    assert_eq!(
        model_forward(&back.params, &x).unwrap(),
        model_forward(&ck.params, &x).unwrap()
    );
    assert_eq!(std::fs::read_to_string(&path).unwrap(), back.to_json());
}

#[test]
fn corrupt_checkpoint_rejected() {
    let ck = Checkpoint::new(
        TrainConfig::default(),
        None,
        init_params(&TrainConfig::default(), 0).unwrap(),
    );
    let text = ck
        .to_json()
        .replace("grace-acc-checkpoint", "something-else");
    assert!(Checkpoint::from_json(&text).is_err());
    assert!(Checkpoint::from_json("{").is_err());
}

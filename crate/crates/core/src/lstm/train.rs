use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::model::{backward, forward_cached, mae, mse, predict};
use super::params::{init_params, ModelParams};
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::ingest::write_file;
use crate::preprocess::{Origin, WindowedDataset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// Mean of the per-batch training MSE over the epoch, weighted by batch size.
    pub loss: f64,
    pub mae: f64,
    pub val_loss: f64,
    pub val_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,loss,mae,val_loss,val_mae\n");
        for (i, e) in self.epochs.iter().enumerate() {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e}\n",
                i + 1,
                e.loss,
                e.mae,
                e.val_loss,
                e.val_mae
            ));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_csv().as_bytes())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut epochs = Vec::new();
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .skip(1)
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line_no: n + 1,
                    reason: "expected epoch,loss,mae,val_loss,val_mae".into(),
                })?;
            if v.len() != 4 {
                return Err(Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line_no: n + 1,
                    reason: format!("{} metric columns", v.len()),
                });
            }
            epochs.push(EpochStats {
                loss: v[0],
                mae: v[1],
                val_loss: v[2],
                val_mae: v[3],
            });
        }
        Ok(TrainHistory { epochs })
    }
}

/// Splits off the trailing `fraction` of pairs as validation data, before any
/// shuffling. Returns `(train, validation)`.
pub fn split_validation(
    ds: &WindowedDataset,
    fraction: f64,
) -> Result<(WindowedDataset, WindowedDataset)> {
    let n = ds.len();
    let n_train = ((n as f64 * (1.0 - fraction)) + 1e-9).floor() as usize;
    if n < 2 || n_train == 0 || n_train == n {
        return Err(Error::TooFewPairs { needed: 2, got: n });
    }
    let lb = ds.look_back;
    let (xa, xb) = ds.x().split_at(n_train * lb);
    let (ya, yb) = ds.y().split_at(n_train);
    Ok((
        WindowedDataset::from_rows(lb, xa.to_vec(), ya.to_vec(), Origin::Train)?,
        WindowedDataset::from_rows(lb, xb.to_vec(), yb.to_vec(), Origin::Train)?,
    ))
}

/// Initialises parameters from `config.rng_seed` and trains.
pub fn fit(train: &WindowedDataset, config: &TrainConfig) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    let params = init_params(config, config.rng_seed)?;
    fit_from(params, train, config)
}

/// Trains `params` for `config.epochs` epochs. The last `validation_fraction`
/// of pairs is held out; the rest is reshuffled every epoch with a generator
/// seeded from `config.rng_seed` and consumed in mini-batches.
pub fn fit_from(
    mut params: ModelParams,
    train: &WindowedDataset,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    params.validate()?;
    if train.look_back != params.look_back || config.look_back != params.look_back {
        return Err(Error::ShapeMismatch {
            expected: format!("look_back {}", params.look_back),
            got: format!("dataset {}, config {}", train.look_back, config.look_back),
        });
    }
    let (fit_set, val_set) = split_validation(train, config.validation_fraction)?;
    let lb = train.look_back;
    let adam = config.adam();
    let mut state = AdamState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..fit_set.len()).collect();
    let mut history = TrainHistory::default();
    let mut xb = Vec::with_capacity(config.batch_size * lb);
    let mut yb = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut mae_sum) = (0.0, 0.0);
        for batch in order.chunks(config.batch_size) {
            xb.clear();
            yb.clear();
            for &i in batch {
                xb.extend_from_slice(fit_set.row(i));
                yb.push(fit_set.y()[i]);
            }
            let (pred, cache) = forward_cached(&params, &xb)?;
            let batch_loss = mse(&pred, &yb)?;
            if !batch_loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "training loss in epoch {}",
                    epoch + 1
                )));
            }
            loss_sum += batch_loss * batch.len() as f64;
            mae_sum += mae(&pred, &yb)? * batch.len() as f64;
            let grads = backward(&params, &cache, &yb)?;
            adam_step(&mut params, &grads, &mut state, &adam)?;
        }
        let n = fit_set.len() as f64;
        let val_pred = predict(&params, &val_set)?;
        let stats = EpochStats {
            loss: loss_sum / n,
            mae: mae_sum / n,
            val_loss: mse(&val_pred, val_set.y())?,
            val_mae: mae(&val_pred, val_set.y())?,
        };
        if !(stats.val_loss.is_finite() && stats.loss.is_finite()) {
            return Err(Error::NonFinite(format!("loss in epoch {}", epoch + 1)));
        }
        history.epochs.push(stats);
    }
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::create_dataset_values;

    fn sine(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 0.5 + 0.5 * (i as f64 * std::f64::consts::TAU / 50.0).sin())
            .collect()
    }

    #[test]
    fn validation_split_counts() {
        let ds = create_dataset_values(&vec![0.0; 115], 15, Origin::Train).unwrap();
        assert_eq!(ds.len(), 100);
        let (a, b) = split_validation(&ds, 0.15).unwrap();
        assert_eq!((a.len(), b.len()), (85, 15));
        let one = create_dataset_values(&[0.0; 16], 15, Origin::Train).unwrap();
        assert!(matches!(
            split_validation(&one, 0.15),
            Err(Error::TooFewPairs { .. })
        ));
    }

    #[test]
    fn deterministic_history() {
        let ds = create_dataset_values(&sine(200), 15, Origin::Train).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            rng_seed: 42,
            ..TrainConfig::default()
        };
        let (p1, h1) = fit(&ds, &cfg).unwrap();
        let (p2, h2) = fit(&ds, &cfg).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(p1, p2);
        assert_eq!(h1.len(), 3);
        let (_, h3) = fit(
            &ds,
            &TrainConfig {
                rng_seed: 43,
                ..cfg
            },
        )
        .unwrap();
        assert_ne!(h1, h3);
    }

    #[test]
    fn sine_loss_decreases() {
        let ds = create_dataset_values(&sine(400), 15, Origin::Train).unwrap();
        let cfg = TrainConfig {
            epochs: 15,
            rng_seed: 1,
            ..TrainConfig::default()
        };
        let (_, h) = fit(&ds, &cfg).unwrap();
        assert!(h.epochs.last().unwrap().loss < h.epochs[0].loss);
    }

    #[test]
    fn history_csv_round_trip() {
        let h = TrainHistory {
            epochs: vec![
                EpochStats {
                    loss: 0.1,
                    mae: 0.2,
                    val_loss: 1.0 / 3.0,
                    val_mae: 4e-9,
                },
                EpochStats {
                    loss: 0.05,
                    mae: 0.1,
                    val_loss: 0.2,
                    val_mae: 0.3,
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        h.write_csv(&path).unwrap();
        assert!(h
            .to_csv()
            .starts_with("epoch,loss,mae,val_loss,val_mae\n1,"));
        assert_eq!(TrainHistory::read_csv(&path).unwrap(), h);
    }

    #[test]
    fn too_few_pairs() {
        let ds = create_dataset_values(&[0.1; 16], 15, Origin::Train).unwrap();
        assert!(matches!(
            fit(&ds, &TrainConfig::default()),
            Err(Error::TooFewPairs { .. })
        ));
    }
}

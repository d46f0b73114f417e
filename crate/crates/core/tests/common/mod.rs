//! Shared oracles and fixtures for the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use grace_acc::ingest::{AccSchema, SatId};
use grace_acc::lstm::{backward, forward_cached, model_forward, mse, ModelParams};
use grace_acc::synth::SyntheticDay;

/// `k`-th smallest value (0-based) found by counting, without sorting.
pub fn kth_smallest(values: &[f64], k: usize) -> f64 {
    for &v in values {
        let below = values.iter().filter(|&&w| w < v).count();
        let at_or_below = values.iter().filter(|&&w| w <= v).count();
        if below <= k && k < at_or_below {
            return v;
        }
    }
    unreachable!("k out of range")
}

/// Percentile for `p` in whole percent, with the fractional position kept as
/// an exact integer ratio.
pub fn oracle_percentile(values: &[f64], p: usize) -> f64 {
    let n = values.len();
    let scaled = p * (n - 1);
    let (lo, rem) = (scaled / 100, scaled % 100);
    let a = kth_smallest(values, lo);
    if rem == 0 {
        return a;
    }
    let b = kth_smallest(values, lo + 1);
    a + (b - a) * (rem as f64 / 100.0)
}

/// Brute-force 1.5·IQR filter: keeps values inside the closed fence.
pub fn oracle_filter(values: &[f64]) -> Vec<f64> {
    let q1 = oracle_percentile(values, 25);
    let q3 = oracle_percentile(values, 75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    values
        .iter()
        .copied()
        .filter(|&v| !(v < lo || v > hi))
        .collect()
}

pub const FD_EPS: f64 = 1e-5;
/// Denominator floor for the relative error so parameters whose true
/// gradient is numerically zero are judged by absolute agreement.
pub const REL_FLOOR: f64 = 1e-8;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Largest relative error between the analytic gradient of the MSE loss and
/// central finite differences, over every parameter.
pub fn max_gradient_error(params: &ModelParams, x: &[f64], y: &[f64]) -> f64 {
    let (_, cache) = forward_cached(params, x).unwrap();
    let analytic = backward(params, &cache, y).unwrap().to_flat();
    let base = params.to_flat();
    let mut probe = params.clone();
    let mut theta = base.clone();
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        theta[i] = base[i] + FD_EPS;
        probe.set_flat(&theta).unwrap();
        let up = mse(&model_forward(&probe, x).unwrap(), y).unwrap();
        theta[i] = base[i] - FD_EPS;
        probe.set_flat(&theta).unwrap();
        let down = mse(&model_forward(&probe, x).unwrap(), y).unwrap();
        theta[i] = base[i];
        worst = worst.max(relative_error(analytic[i], (up - down) / (2.0 * FD_EPS)));
    }
    worst
}

pub fn test_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2005, 5, 30).unwrap()
}

/// Writes a synthetic day file per satellite into `dir` and returns the paths.
pub fn write_synthetic_days(dir: &Path, samples: usize) -> Vec<PathBuf> {
    let schema = AccSchema::default();
    [SatId::A, SatId::B]
        .into_iter()
        .enumerate()
        .map(|(seed, sat)| {
            let day = SyntheticDay::new(sat, test_date(), seed as u64)
                .with_samples(samples)
                .generate();
            let path = dir.join(format!("ACC1B_{}_{sat}.asc", test_date()));
            std::fs::write(&path, day.to_acc1b_string(&schema)).unwrap();
            path
        })
        .collect()
}

/// Every file under `root`, relative path → bytes, sorted by path.
pub fn snapshot(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

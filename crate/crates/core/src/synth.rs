//! Synthetic accelerometer days for demos and tests when real Level-1B files
//! are not at hand. Each axis is a bias plus once- and twice-per-revolution
//! terms, white noise and sparse spikes, at 1 Hz.

use std::f64::consts::TAU;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::{gps_seconds_at_midnight, AccSample, DailyAccFile, SatId};

/// Approximate orbital period of a ~450 km orbit, seconds.
pub const ORBIT_PERIOD_S: f64 = 5640.0;

#[derive(Debug, Clone)]
pub struct SyntheticDay {
    pub sat_id: SatId,
    pub date: NaiveDate,
    pub samples: usize,
    /// Per-axis constant bias, m/s².
    pub bias: [f64; 3],
    /// Per-axis once-per-rev amplitude, m/s².
    pub amplitude: [f64; 3],
    pub noise_std: f64,
    /// Probability of a spike per sample.
    pub spike_rate: f64,
    pub spike_scale: f64,
    pub seed: u64,
}

impl SyntheticDay {
    pub fn new(sat_id: SatId, date: NaiveDate, seed: u64) -> Self {
        SyntheticDay {
            sat_id,
            date,
            samples: 86_400,
            bias: [-1.2e-6, 2.8e-6, -0.6e-6],
            amplitude: [4e-7, 6e-8, 2.5e-7],
            noise_std: 1e-8,
            spike_rate: 0.004,
            spike_scale: 2e-6,
            seed,
        }
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn generate(&self) -> DailyAccFile {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, self.noise_std).expect("valid std");
        let t0 = gps_seconds_at_midnight(self.date);
        let phase: [f64; 3] = [
            rng.random::<f64>() * TAU,
            rng.random::<f64>() * TAU,
            rng.random::<f64>() * TAU,
        ];
        let samples = (0..self.samples)
            .map(|k| {
                let t = k as f64;
                let w = TAU * t / ORBIT_PERIOD_S;
                let mut lin_acc = [0.0; 3];
                for a in 0..3 {
                    let mut v = self.bias[a]
                        + self.amplitude[a] * (w + phase[a]).sin()
                        + 0.3 * self.amplitude[a] * (2.0 * w + phase[a]).cos()
                        + noise.sample(&mut rng);
                    if rng.random::<f64>() < self.spike_rate {
                        v += self.spike_scale
                            * (rng.random::<f64>() * 2.0 - 1.0).signum()
                            * (1.0 + rng.random::<f64>());
                    }
                    lin_acc[a] = v;
                }
                AccSample {
                    gps_time: t0 + k as u64,
                    sat_id: self.sat_id,
                    lin_acc,
                    flagged: false,
                }
            })
            .collect();
        DailyAccFile {
            sat_id: self.sat_id,
            date: self.date,
            samples,
            header_lines: vec![
                "PRODUCER AGENCY               : synthetic".to_string(),
                format!("SATELLITE NAME                : GRACE {}", self.sat_id),
                format!("TIME FIRST OBS(SEC PAST EPOCH): {t0}"),
                format!("NUMBER OF DATA RECORDS        : {}", self.samples),
            ],
        }
    }
}

/// `0.5 + 0.5·sin(2π·i/period)` for `i in 0..n`.
pub fn sine_series(n: usize, period: f64) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 + 0.5 * (TAU * i as f64 / period).sin())
        .collect()
}

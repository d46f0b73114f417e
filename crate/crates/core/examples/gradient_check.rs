//! Compares analytic gradients against central finite differences for every
//! parameter of a freshly initialised model, for both input layouts.
//!
//! cargo run --release --example gradient_check -- [seed] [batch]

use grace_acc::lstm::{
    backward, forward_cached, init_params, model_forward, mse, InputLayout, ModelParams,
    TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-5;

fn loss(p: &ModelParams, x: &[f64], y: &[f64]) -> f64 {
    mse(&model_forward(p, x).unwrap(), y).unwrap()
}

fn main() -> grace_acc::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(0);
    let batch: usize = args.next().map(|s| s.parse().expect("batch")).unwrap_or(8);
    for layout in [
        InputLayout::OneStepLookbackFeatures,
        InputLayout::LookbackStepsOneFeature,
    ] {
        let cfg = TrainConfig {
            input_layout: layout,
            ..TrainConfig::default()
        };
        let params = init_params(&cfg, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let x: Vec<f64> = (0..batch * cfg.look_back).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..batch).map(|_| rng.random()).collect();

        let (_, cache) = forward_cached(&params, &x)?;
        let analytic = backward(&params, &cache, &y)?.to_flat();
        let base = params.to_flat();
        let mut probe = params.clone();
        let (mut worst_abs, mut worst_rel) = (0.0f64, 0.0f64);
        for i in 0..base.len() {
            let mut theta = base.clone();
            theta[i] = base[i] + EPS;
            probe.set_flat(&theta)?;
            let up = loss(&probe, &x, &y);
            theta[i] = base[i] - EPS;
            probe.set_flat(&theta)?;
            let down = loss(&probe, &x, &y);
            let numeric = (up - down) / (2.0 * EPS);
            let diff = (analytic[i] - numeric).abs();
            worst_abs = worst_abs.max(diff);
            let scale = analytic[i].abs().max(numeric.abs());
            if scale > 0.0 {
                worst_rel = worst_rel.max(diff / scale);
            }
        }
        println!(
            "{layout:?}: {} parameters, max |analytic - numeric| = {worst_abs:.2e}, max relative = {worst_rel:.2e}",
            base.len()
        );
    }
    Ok(())
}

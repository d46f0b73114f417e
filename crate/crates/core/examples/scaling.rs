//! Fits MinMax and Robust scalers to one axis and checks the round trip.
//!
//! cargo run --release --example scaling

use chrono::NaiveDate;
use grace_acc::ingest::{extract_axis, Axis, SatId};
use grace_acc::preprocess::{fit_scaler, inverse_transform, transform, ScalerKind};
use grace_acc::synth::SyntheticDay;

fn main() -> grace_acc::Result<()> {
    let date = NaiveDate::from_ymd_opt(2005, 5, 30).unwrap();
    let day = SyntheticDay::new(SatId::A, date, 5)
        .with_samples(20_000)
        .generate();
    let raw = extract_axis(&day, Axis::Y)?;
    for kind in [ScalerKind::MinMax, ScalerKind::Robust] {
        let params = fit_scaler(&raw, kind)?;
        let scaled = transform(&raw, &params)?;
        let back = inverse_transform(&scaled, &params)?;
        let lo = scaled
            .values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let hi = scaled
            .values()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let peak = raw.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = raw
            .values()
            .iter()
            .zip(back.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / peak;
        println!("{kind:?}: {params:?}");
        println!(
            "   scaled range [{lo:.4}, {hi:.4}], round-trip error {err:.2e} (relative to max |x|)"
        );
    }
    Ok(())
}

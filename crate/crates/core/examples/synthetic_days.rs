//! Writes a synthetic Level-1B accelerometer day for each satellite so the
//! `grace-acc` binary has something to chew on.
//!
//! cargo run --release --example synthetic_days -- data/ [samples]

use chrono::NaiveDate;
use grace_acc::ingest::{AccSchema, SatId};
use grace_acc::synth::SyntheticDay;

fn main() -> grace_acc::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = std::path::PathBuf::from(args.next().unwrap_or_else(|| "data".into()));
    let samples: usize = args
        .next()
        .map(|s| s.parse().expect("samples must be an integer"))
        .unwrap_or(86_400);
    std::fs::create_dir_all(&dir).map_err(|e| grace_acc::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let date = NaiveDate::from_ymd_opt(2005, 5, 30).unwrap();
    let schema = AccSchema::default();
    for (seed, sat) in [SatId::A, SatId::B].into_iter().enumerate() {
        let day = SyntheticDay::new(sat, date, seed as u64)
            .with_samples(samples)
            .generate();
        let path = dir.join(format!("ACC1B_{date}_{sat}.asc"));
        std::fs::write(&path, day.to_acc1b_string(&schema)).map_err(|e| grace_acc::Error::Io {
            path: path.clone(),
            source: e,
        })?;
        println!("{} samples -> {}", day.samples.len(), path.display());
    }
    Ok(())
}

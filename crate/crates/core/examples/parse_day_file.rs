//! Parses a Level-1B accelerometer day file and prints per-axis statistics.
//! Without an argument a small synthetic day is parsed from memory.
//!
//! cargo run --release --example parse_day_file -- [path/to/ACC1B.asc]

use std::path::Path;

use chrono::NaiveDate;
use grace_acc::ingest::{extract_axis, parse_acc1b, parse_acc1b_str, AccSchema, Axis, SatId};
use grace_acc::synth::SyntheticDay;

fn main() -> grace_acc::Result<()> {
    let schema = AccSchema::default();
    let day = match std::env::args().nth(1) {
        Some(path) => parse_acc1b(path, &schema)?,
        None => {
            let date = NaiveDate::from_ymd_opt(2005, 5, 30).unwrap();
            let text = SyntheticDay::new(SatId::A, date, 7)
                .with_samples(3600)
                .generate()
                .to_acc1b_string(&schema);
            parse_acc1b_str(&text, Path::new("<synthetic>"), &schema)?
        }
    };
    println!(
        "{}: {} header lines, {} samples, {} flagged",
        day.label(),
        day.header_lines.len(),
        day.samples.len(),
        day.flagged_count()
    );
    for axis in Axis::ALL {
        let s = extract_axis(&day, axis)?;
        let v = s.values();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("  {axis}: mean {mean:+.3e}  min {min:+.3e}  max {max:+.3e} m/s²");
    }
    Ok(())
}

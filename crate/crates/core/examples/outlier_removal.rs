//! Applies the 1.5·IQR fence to a synthetic axis and shows what was dropped.
//!
//! cargo run --release --example outlier_removal

use chrono::NaiveDate;
use grace_acc::ingest::{extract_axis, Axis, SatId};
use grace_acc::preprocess::remove_outliers;
use grace_acc::synth::SyntheticDay;

fn main() -> grace_acc::Result<()> {
    let date = NaiveDate::from_ymd_opt(2005, 5, 30).unwrap();
    let day = SyntheticDay::new(SatId::B, date, 11).generate();
    for axis in Axis::ALL {
        let raw = extract_axis(&day, axis)?;
        let (clean, report) = remove_outliers(&raw)?;
        println!(
            "{axis}: q1 {:+.4e}  q3 {:+.4e}  fence [{:+.4e}, {:+.4e}]  removed {} of {}, kept {}",
            report.q1,
            report.q3,
            report.min_limit,
            report.max_limit,
            report.removed_indices.len(),
            report.input_len(),
            clean.len()
        );
        let shown: Vec<String> = report
            .removed_indices
            .iter()
            .take(5)
            .map(|&i| format!("#{i}={:+.2e}", raw.values()[i]))
            .collect();
        println!("   first removed: {}", shown.join(", "));
    }
    Ok(())
}

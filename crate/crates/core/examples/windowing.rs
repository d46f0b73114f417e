//! Splits a short series and builds look-back windows for each part.
//!
//! cargo run --release --example windowing

use grace_acc::preprocess::{create_dataset_values, Origin, SplitSpec};

fn main() -> grace_acc::Result<()> {
    let series: Vec<f64> = (0..40).map(f64::from).collect();
    let look_back = 5;
    let cut = SplitSpec::new(0.7)?.split_index(series.len());
    let (train, test) = series.split_at(cut);
    for (name, part, origin) in [
        ("train", train, Origin::Train),
        ("test", test, Origin::Test),
    ] {
        let ds = create_dataset_values(part, look_back, origin)?;
        println!("{name}: {} values -> {} pairs", part.len(), ds.len());
        for (i, row) in ds.rows().enumerate().take(3) {
            println!("   {row:?} -> {}", ds.y()[i]);
        }
    }
    Ok(())
}

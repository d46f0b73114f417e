//! Report files for a set of evaluated satellite/axis combinations.
//!
//! For every [`EvalReport`] `emit_report` writes
//!
//! | file                         | content                                  |
//! |------------------------------|------------------------------------------|
//! | `<sat>_<axis>_history.csv`   | `epoch,loss,mae,val_loss,val_mae`        |
//! | `<sat>_<axis>_predictions.csv` | `index,truth,prediction` (m/s²)        |
//! | `<sat>_<axis>_loss.svg`      | training and validation loss curves      |
//! | `<sat>_<axis>_prediction.svg`| truth vs. prediction overlay             |
//!
//! plus one `rmse_bar.svg` comparing train/test RMSE of every report.

pub mod svg;

use std::fmt::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forecast::{EvalReport, ForecastResult};
use crate::ingest::write_file;

pub const RMSE_BAR_FILE: &str = "rmse_bar.svg";
pub const RMSE_TABLE_FILE: &str = "rmse_scores.csv";

pub fn predictions_csv(report: &EvalReport) -> String {
    let mut s = String::from("index,truth,prediction\n");
    for trace in [&report.train_trace, &report.test_trace] {
        for (k, (t, p)) in trace.truth.iter().zip(&trace.prediction).enumerate() {
            let _ = writeln!(s, "{},{t:e},{p:e}", trace.start_index + k);
        }
    }
    s
}

fn loss_svg(report: &EvalReport) -> String {
    let epochs = &report.history.epochs;
    let pts = |f: fn(&crate::lstm::EpochStats) -> f64| {
        epochs
            .iter()
            .enumerate()
            .map(|(i, e)| ((i + 1) as f64, f(e)))
            .collect::<Vec<_>>()
    };
    svg::line_chart(
        &format!("GRACE {} {}-axis: model loss", report.sat_id, report.axis),
        "epoch",
        "MSE (scaled)",
        &[
            svg::Line {
                name: "train",
                points: pts(|e| e.loss),
            },
            svg::Line {
                name: "validation",
                points: pts(|e| e.val_loss),
            },
        ],
    )
}

fn prediction_svg(report: &EvalReport) -> String {
    let mut truth = Vec::new();
    let mut train_pred = Vec::new();
    let mut test_pred = Vec::new();
    for (trace, dst) in [
        (&report.train_trace, &mut train_pred),
        (&report.test_trace, &mut test_pred),
    ] {
        for (k, (t, p)) in trace.truth.iter().zip(&trace.prediction).enumerate() {
            let idx = (trace.start_index + k) as f64;
            truth.push((idx, *t));
            dst.push((idx, *p));
        }
    }
    svg::line_chart(
        &format!("GRACE {} {}-axis: prediction", report.sat_id, report.axis),
        "sample index",
        "acceleration (m/s²)",
        &[
            svg::Line {
                name: "truth",
                points: truth,
            },
            svg::Line {
                name: "train prediction",
                points: train_pred,
            },
            svg::Line {
                name: "test prediction",
                points: test_pred,
            },
        ],
    )
}

/// Grouped train/test RMSE bars (units of 1e-6 m/s²), one group per report.
pub fn rmse_bar_svg(reports: &[EvalReport]) -> String {
    let groups: Vec<svg::BarGroup> = reports
        .iter()
        .map(|r| {
            let attrs = |split: &str| {
                vec![
                    ("satellite".to_string(), r.sat_id.to_string()),
                    ("axis".to_string(), r.axis.to_string()),
                    ("split".to_string(), split.to_string()),
                ]
            };
            svg::BarGroup {
                label: format!("{} {}", r.sat_id, r.axis),
                values: vec![r.train_rmse_1e6(), r.test_rmse_1e6()],
                attrs: vec![attrs("train"), attrs("test")],
            }
        })
        .collect();
    svg::bar_chart(
        "RMSE per axis",
        "RMSE (1e-6 m/s²)",
        &["train", "test"],
        &groups,
    )
}

/// Writes the per-report CSV/SVG set and the RMSE bar chart into `out_dir`.
/// Returns the written paths in a fixed order.
pub fn emit_report(reports: &[EvalReport], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let out_dir = out_dir.as_ref();
    let mut written = Vec::with_capacity(reports.len() * 4 + 1);
    let mut put = |name: String, bytes: &[u8]| -> Result<()> {
        let p = out_dir.join(name);
        write_file(&p, bytes)?;
        written.push(p);
        Ok(())
    };
    for r in reports {
        let label = r.label();
        put(
            format!("{label}_history.csv"),
            r.history.to_csv().as_bytes(),
        )?;
        put(
            format!("{label}_predictions.csv"),
            predictions_csv(r).as_bytes(),
        )?;
        put(format!("{label}_loss.svg"), loss_svg(r).as_bytes())?;
        put(
            format!("{label}_prediction.svg"),
            prediction_svg(r).as_bytes(),
        )?;
    }
    put(RMSE_BAR_FILE.to_string(), rmse_bar_svg(reports).as_bytes())?;
    Ok(written)
}

/// `satellite,axis,split,rmse_1e6` with `train`, `test` and `persistence` rows per report.
pub fn rmse_table_csv(reports: &[EvalReport]) -> String {
    let mut s = String::from("satellite,axis,split,rmse_1e6\n");
    for r in reports {
        for (split, v) in [
            ("train", r.train_rmse_1e6()),
            ("test", r.test_rmse_1e6()),
            ("persistence", r.baseline_rmse_1e6()),
        ] {
            let _ = writeln!(s, "{},{},{split},{v}", r.sat_id, r.axis);
        }
    }
    s
}

pub fn write_rmse_table(reports: &[EvalReport], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), rmse_table_csv(reports).as_bytes())
}

/// `step,value` rows in original units; header only when no steps were requested.
pub fn forecast_csv(result: &ForecastResult) -> String {
    let mut s = String::from("step,value\n");
    for (i, v) in result.predicted.iter().enumerate() {
        let _ = writeln!(s, "{},{v:e}", i + 1);
    }
    s
}

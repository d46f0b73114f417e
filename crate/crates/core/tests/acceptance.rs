//! Acceptance gate. Each test checks one criterion and writes a single
//! `PASS`/`FAIL` line to stdout (uncaptured, so it shows without
//! `--nocapture`). Criteria that need the real 2005-05-30 day files read them
//! from `$GRACE_ACC_DATA_DIR` and fail as BLOCKED when it is unset.

mod common;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

use grace_acc::forecast::{
    evaluate, recursive_forecast, rmse, EvalContext, EvalReport, PredictionTrace,
};
use grace_acc::ingest::{extract_axis, parse_acc1b, AccSchema, Axis, DailyAccFile, SatId};
use grace_acc::lstm::{
    fit, init_params, Checkpoint, EpochStats, InputLayout, TrainConfig, TrainHistory,
};
use grace_acc::preprocess::{
    create_dataset_values, filter_outliers, fit_scaler_values, prepare_axis, Origin, PipelineOrder,
    PrepConfig, ScalerKind, SplitSpec,
};
use grace_acc::report::emit_report;
use grace_acc::synth::{sine_series, SyntheticDay};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

/// Timed criteria must not share the CPU with each other.
static SERIAL: Mutex<()> = Mutex::new(());

const DATA_ENV: &str = "GRACE_ACC_DATA_DIR";

/// Published per-axis retained counts and RMSE (1e-6 m/s²): (sat, axis, retained, train, test).
const REFERENCE: [(SatId, Axis, usize, f64, f64); 6] = [
    (SatId::A, Axis::X, 8548, 1.0, 1.0),
    (SatId::A, Axis::Y, 8618, 3.29, 2.45),
    (SatId::A, Axis::Z, 8608, 2.0, 2.0),
    (SatId::B, Axis::X, 8545, 0.53, 0.50),
    (SatId::B, Axis::Y, 8634, 2.0, 3.0),
    (SatId::B, Axis::Z, 8613, 2.0, 3.0),
];

fn verdict(name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[acceptance] {tag} {name}: {detail}");
    let _ = out.flush();
    assert!(pass, "{name}: {detail}");
}

fn random_array(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(5..=1000);
    match rng.random_range(0..4) {
        0 => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        1 => (0..n)
            .map(|_| f64::from(rng.random_range(-6i32..6)))
            .collect(),
        2 => {
            let normal = Normal::new(2e-6, 1e-7).unwrap();
            (0..n)
                .map(|_| {
                    let v = normal.sample(rng);
                    if rng.random::<f64>() < 0.02 {
                        v + 3e-6 * rng.random_range(-1.0..1.0)
                    } else {
                        v
                    }
                })
                .collect()
        }
        _ => (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z.powi(3)
            })
            .collect(),
    }
}

#[test]
fn outlier_removal_matches_oracle() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = ChaCha8Rng::seed_from_u64(2005);
    let arrays: Vec<Vec<f64>> = (0..1000).map(|_| random_array(&mut rng)).collect();
    let start = Instant::now();
    let outputs: Vec<Vec<f64>> = arrays
        .iter()
        .map(|a| filter_outliers(a).unwrap().0)
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mismatches = arrays
        .iter()
        .zip(&outputs)
        .filter(|(a, out)| common::oracle_filter(a) != **out)
        .count();
    let removed: usize = arrays
        .iter()
        .zip(&outputs)
        .map(|(a, o)| a.len() - o.len())
        .sum();
    verdict(
        "outlier-removal oracle equivalence",
        mismatches == 0 && elapsed < 10.0,
        &format!("{mismatches} mismatches over 1000 arrays (lengths 5-1000, {removed} values removed), filter runtime {elapsed:.3} s (limit 10 s)"),
    );
}

#[test]
fn scaler_round_trip() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = [0.0f64; 2];
    let mut checked = 0;
    for _ in 0..500 {
        let v = random_array(&mut rng);
        for (k, kind) in [ScalerKind::MinMax, ScalerKind::Robust]
            .into_iter()
            .enumerate()
        {
            let s = fit_scaler_values(&v, kind).unwrap();
            if s.is_degenerate() {
                continue;
            }
            let back = s.invert(&s.apply(&v).unwrap()).unwrap();
            let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let err = v
                .iter()
                .zip(&back)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / peak;
            worst[k] = worst[k].max(err);
            checked += 1;
        }
    }
    verdict(
        "scaler round-trip",
        worst[0] <= 1e-12 && worst[1] <= 1e-12,
        &format!(
            "max |x'-x|/max|x| = {:.2e} (minmax), {:.2e} (robust) over {checked} fits (limit 1e-12)",
            worst[0], worst[1]
        ),
    );
}

#[test]
fn gradient_check() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for seed in 0..5u64 {
        for layout in [
            InputLayout::OneStepLookbackFeatures,
            InputLayout::LookbackStepsOneFeature,
        ] {
            for batch in [1usize, 8] {
                let cfg = TrainConfig {
                    input_layout: layout,
                    ..TrainConfig::default()
                };
                let params = init_params(&cfg, seed).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
                let x: Vec<f64> = (0..batch * cfg.look_back).map(|_| rng.random()).collect();
                let y: Vec<f64> = (0..batch).map(|_| rng.random()).collect();
                worst = worst.max(common::max_gradient_error(&params, &x, &y));
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "gradient check",
        worst <= 1e-4 && elapsed < 60.0,
        &format!(
            "max relative error {worst:.2e} (limit 1e-4, eps {:e}) over {cases} cases (5 seeds x 2 layouts x batch 1/8), runtime {elapsed:.1} s (limit 60 s)",
            common::FD_EPS
        ),
    );
}

#[test]
fn run_all_is_deterministic() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let dir = tempfile::tempdir().unwrap();
    let files = common::write_synthetic_days(dir.path(), 12_000);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_grace-acc"));
        cmd.args([
            "run-all",
            "--seed",
            "11",
            "--epochs",
            "4",
            "--jobs",
            "2",
            "--out-dir",
        ])
        .arg(&out)
        .args(&files);
        let o = cmd.output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        common::snapshot(&out)
    };
    let a = run("first");
    let b = run("second");
    let count = |ext: &str| {
        a.iter()
            .filter(|(p, _)| p.extension().is_some_and(|e| e == ext))
            .count()
    };
    let differing: Vec<&PathBuf> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| &x.0)
        .collect();
    let same_listing = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.0 == y.0);
    verdict(
        "determinism",
        same_listing && differing.is_empty() && !a.is_empty(),
        &format!(
            "{} files compared ({} json, {} csv, {} svg), {} differ",
            a.len(),
            count("json"),
            count("csv"),
            count("svg"),
            differing.len()
        ),
    );
}

/// The 2005-05-30 day files for both satellites under `$GRACE_ACC_DATA_DIR`.
fn real_days() -> Result<Vec<DailyAccFile>, String> {
    let dir = std::env::var_os(DATA_ENV)
        .ok_or_else(|| format!("BLOCKED: set {DATA_ENV} to a directory holding the 2005-05-30 GRACE A and B ACC1B .asc files"))?;
    let mut days = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| format!("BLOCKED: {}: {e}", Path::new(&dir).display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("asc")))
        .collect();
    entries.sort();
    for p in entries {
        let day = parse_acc1b(&p, &AccSchema::default()).map_err(|e| format!("{e}"))?;
        if day.date == common::test_date() {
            days.push(day);
        }
    }
    days.sort_by_key(|d| d.sat_id);
    if days.iter().map(|d| d.sat_id).collect::<Vec<_>>() != [SatId::A, SatId::B] {
        return Err(format!(
            "BLOCKED: {DATA_ENV} does not hold exactly one 2005-05-30 file per satellite"
        ));
    }
    Ok(days)
}

#[test]
fn pipeline_counts_on_real_data() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let days = match real_days() {
        Ok(d) => d,
        Err(msg) => return verdict("pipeline counts", false, &msg),
    };
    let mut ok = true;
    let mut notes = Vec::new();
    let mut exact = [true, true];
    for &(sat, axis, published, _, _) in &REFERENCE {
        let day = days.iter().find(|d| d.sat_id == sat).unwrap();
        let raw = extract_axis(day, axis).unwrap();
        let mut counts = Vec::new();
        for (k, order) in [PipelineOrder::DownsampleFirst, PipelineOrder::CleanFirst]
            .into_iter()
            .enumerate()
        {
            let p = prepare_axis(
                &raw,
                &PrepConfig {
                    order,
                    ..PrepConfig::default()
                },
            )
            .unwrap();
            let retained = p.prepared.len();
            if order == PipelineOrder::DownsampleFirst {
                ok &= p.downsampled.len() == 8640;
            }
            ok &= (8400..=8640).contains(&retained);
            exact[k] &= retained == published;
            counts.push(retained);
        }
        notes.push(format!(
            "{sat}{axis}: {} / {} (published {published})",
            counts[0], counts[1]
        ));
    }
    verdict(
        "pipeline counts",
        ok,
        &format!(
            "retained downsample-first / clean-first: {}; exact match downsample-first {}, clean-first {}",
            notes.join(", "),
            exact[0],
            exact[1]
        ),
    );
}

/// Seconds for one full-length training run on a synthetic day, used as a
/// runtime proxy when the real files are missing.
fn synthetic_training_seconds() -> f64 {
    let day = SyntheticDay::new(SatId::A, common::test_date(), 0).generate();
    let p = prepare_axis(
        &extract_axis(&day, Axis::X).unwrap(),
        &PrepConfig::default(),
    )
    .unwrap();
    let start = Instant::now();
    fit(&p.train_ds, &TrainConfig::default()).unwrap();
    start.elapsed().as_secs_f64()
}

#[test]
fn rmse_magnitude_on_real_data() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let days = match real_days() {
        Ok(d) => d,
        Err(msg) => {
            let secs = synthetic_training_seconds();
            return verdict(
                "RMSE magnitude reproduction",
                false,
                &format!("{msg}; runtime proxy: 300 epochs on a synthetic full day took {secs:.1} s (limit 900 s per axis)"),
            );
        }
    };
    let cfg = TrainConfig::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for &(sat, axis, _, _, published_test) in &REFERENCE {
        let day = days.iter().find(|d| d.sat_id == sat).unwrap();
        let p = prepare_axis(&extract_axis(day, axis).unwrap(), &PrepConfig::default()).unwrap();
        let start = Instant::now();
        let (params, history) = fit(&p.train_ds, &cfg).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let model = Checkpoint::new(cfg.clone(), Some(p.scaler), params);
        let ctx = EvalContext {
            sat_id: sat,
            axis,
            retained_count: p.prepared.len(),
            history,
        };
        let r = evaluate(&model, &p.train_ds, &p.test_ds, &p.scaler, ctx).unwrap();
        let pass = r.test_rmse_1e6() <= 3.0 * published_test
            && r.test_rmse <= 1.5 * r.baseline_rmse
            && secs <= 900.0;
        ok &= pass;
        notes.push(format!(
            "{sat}{axis} test {:.3} (limit {:.2}) persistence {:.3} {secs:.0}s",
            r.test_rmse_1e6(),
            3.0 * published_test,
            r.baseline_rmse_1e6()
        ));
    }
    verdict(
        "RMSE magnitude reproduction",
        ok,
        &format!("1e-6 m/s²: {}", notes.join(", ")),
    );
}

#[test]
fn synthetic_sine_sanity() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let raw = sine_series(1000, 50.0);
    let scaler = fit_scaler_values(&raw, ScalerKind::MinMax).unwrap();
    let scaled = scaler.apply(&raw).unwrap();
    let (train, test) = scaled.split_at(SplitSpec::new(0.7).unwrap().split_index(scaled.len()));
    let cfg = TrainConfig {
        epochs: 50,
        ..TrainConfig::default()
    };
    let ds = create_dataset_values(train, cfg.look_back, Origin::Train).unwrap();
    let (params, history) = fit(&ds, &cfg).unwrap();
    let reduction = history.epochs[0].loss / history.epochs[49].loss;
    let fc =
        recursive_forecast(&params, &train[train.len() - cfg.look_back..], 20, &scaler).unwrap();
    let err = rmse(&fc.predicted_scaled, &test[..20]).unwrap();
    verdict(
        "synthetic sine sanity",
        reduction >= 10.0 && err < 0.1,
        &format!("train MSE reduced {reduction:.0}x over 50 epochs (need >= 10x), 20-step forecast RMSE {err:.4} scaled (need < 0.1)"),
    );
}

fn table_report(sat: SatId, axis: Axis, retained: usize, train: f64, test: f64) -> EvalReport {
    let trace = |start: usize| PredictionTrace {
        start_index: start,
        truth: vec![1e-6, 2e-6, 1.5e-6],
        prediction: vec![1.1e-6, 1.9e-6, 1.4e-6],
    };
    EvalReport {
        sat_id: sat,
        axis,
        retained_count: retained,
        train_rmse: train * 1e-6,
        test_rmse: test * 1e-6,
        baseline_rmse: test * 1e-6,
        history: TrainHistory {
            epochs: vec![
                EpochStats {
                    loss: 0.02,
                    mae: 0.1,
                    val_loss: 0.025,
                    val_mae: 0.11,
                },
                EpochStats {
                    loss: 0.01,
                    mae: 0.07,
                    val_loss: 0.015,
                    val_mae: 0.09,
                },
            ],
        },
        train_trace: trace(15),
        test_trace: trace(6000),
    }
}

/// `(satellite, axis, split, value)` for every bar in the chart.
fn bars(svg: &str) -> Vec<(String, String, String, f64)> {
    let attr = |tag: &str, name: &str| -> String {
        let key = format!("data-{name}=\"");
        let start = tag.find(&key).unwrap() + key.len();
        tag[start..].split('"').next().unwrap().to_string()
    };
    svg.lines()
        .filter(|l| l.contains(r#"class="bar""#))
        .map(|l| {
            (
                attr(l, "satellite"),
                attr(l, "axis"),
                attr(l, "split"),
                attr(l, "value").parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn report_emission() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let reports: Vec<EvalReport> = REFERENCE
        .iter()
        .map(|&(s, a, n, train, test)| table_report(s, a, n, train, test))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_report(&reports, dir.path()).unwrap();
    let mut expected: Vec<String> = Vec::new();
    for &(s, a, ..) in &REFERENCE {
        for suffix in [
            "history.csv",
            "predictions.csv",
            "loss.svg",
            "prediction.svg",
        ] {
            expected.push(format!("{s}_{a}_{suffix}"));
        }
    }
    expected.push("rmse_bar.svg".into());
    expected.sort();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    on_disk.sort();
    let csv = on_disk.iter().filter(|n| n.ends_with(".csv")).count();
    let svg = on_disk.iter().filter(|n| n.ends_with(".svg")).count();

    let chart = std::fs::read_to_string(dir.path().join("rmse_bar.svg")).unwrap();
    let found = bars(&chart);
    let mut value_errors = 0;
    for &(s, a, _, train, test) in &REFERENCE {
        for (split, want) in [("train", train), ("test", test)] {
            let hit = found
                .iter()
                .find(|b| b.0 == s.to_string() && b.1 == a.to_string() && b.2 == split)
                .map(|b| b.3);
            if !hit.is_some_and(|v| (v - want).abs() <= 1e-12 * want) {
                value_errors += 1;
            }
        }
    }
    verdict(
        "report emission",
        on_disk == expected && written.len() == expected.len() && csv == 12 && svg == 13 && found.len() == 12 && value_errors == 0,
        &format!("{csv} csv + {svg} svg for 6 reports (need 12 + 13), {} bars, {value_errors} bar values off the published 12", found.len()),
    );
}

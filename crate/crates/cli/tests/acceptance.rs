//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use paxcast_cli::{cmd_evaluate, RunConfig};
use paxcast_core::gradcheck::{run_gradcheck, TOLERANCE};
use paxcast_core::nn::{model_backward, parameter_count};
use paxcast_core::synthetic::{seasonal_series, SyntheticConfig};
use paxcast_core::train::train;
use paxcast_core::{
    accuracy_from_mape, compute_metrics, fit_scaler, forecast_horizon, interpret_mape, make_walk_forward_plan,
    make_windows, run_walk_forward, select_split_samples, transform, Checkpoint, InterpretationBand, Metrics,
    MetricsReport, ModelSpec, PlanConfig, TrainConfig,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn parameter_counts() -> Outcome {
    let c = parameter_count(&ModelSpec::default());
    check(
        (c.lstm1, c.lstm2, c.dense) == (768, 1200, 13),
        format!("lstm={} lstm_1={} dense={}", c.lstm1, c.lstm2, c.dense),
    )
}

fn gradient_fidelity() -> Outcome {
    match run_gradcheck(2024, 24, model_backward) {
        Ok(r) => check(
            r.configs >= 20 && r.max_rel_error < TOLERANCE,
            format!(
                "{} configs, {} values, max rel err {:.3e} at {}",
                r.configs, r.values_checked, r.max_rel_error, r.worst
            ),
        ),
        Err(e) => check(false, e.to_string()),
    }
}

/// Independent oracle: explicit index loops with no shared helpers.
fn brute_force(a: &[f64], f: &[f64]) -> [f64; 4] {
    let n = a.len() as f64;
    let (mut s_abs, mut s_pct, mut s_sq) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        let d = a[i] - f[i];
        let ad = if d < 0.0 { -d } else { d };
        s_abs += ad;
        s_pct += ad / a[i];
        s_sq += d * d;
    }
    [s_abs / n, s_pct / n, s_sq / n, (s_sq / n).sqrt()]
}

fn rmse_consistent(m: &Metrics) -> bool {
    (m.rmse * m.rmse - m.mse).abs() <= 1e-9 * m.mse.max(f64::MIN_POSITIVE)
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut rows = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let n = rng.random_range(1..=200);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..1e6)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.5e6)).collect();
        let m = match compute_metrics(&a, &f) {
            Ok(m) => m,
            Err(e) => return check(false, e.to_string()),
        };
        let o = brute_force(&a, &f);
        for (x, y) in [m.mae, m.mape, m.mse, m.rmse].into_iter().zip(o) {
            worst = worst.max((x - y).abs() / y.abs().max(f64::MIN_POSITIVE));
        }
        rows.push(m);
    }
    let report = MetricsReport::from_rows(rows).expect("non-empty");
    let rows_ok = report.rows.iter().all(rmse_consistent);
    check(
        worst <= 1e-12 && rows_ok,
        format!("1000 pairs, max rel dev {worst:.2e}, RMSE^2 == MSE on all rows: {rows_ok}"),
    )
}

fn split_plan() -> Outcome {
    let plan = match make_walk_forward_plan(84, 60, 6, 4) {
        Ok(p) => p,
        Err(e) => return check(false, e.to_string()),
    };
    let trains: Vec<_> = plan.splits.iter().map(|s| s.train.clone()).collect();
    let tests: Vec<_> = plan.splits.iter().map(|s| s.test.clone()).collect();
    let ranges_ok = trains == [0..60, 0..66, 0..72, 0..78] && tests == [60..66, 66..72, 72..78, 78..84];

    let values: Vec<f64> = (1..=84).map(f64::from).collect();
    let d = make_windows(&values, 3).expect("84 > 3");
    let (tr, te) = select_split_samples(&d, &plan.splits[0]);
    let mut targets: Vec<usize> = plan
        .splits
        .iter()
        .flat_map(|s| select_split_samples(&d, s).1.target_indices)
        .collect();
    let total = targets.len();
    targets.sort_unstable();
    targets.dedup();
    let ok = ranges_ok && tr.len() == 57 && te.len() == 6 && total == 24 && targets == (60..84).collect::<Vec<_>>();
    check(
        ok,
        format!(
            "trains {trains:?} tests {tests:?}; split 1 {}/{} samples; {total} test targets, {} distinct",
            tr.len(),
            te.len(),
            targets.len()
        ),
    )
}

fn windowing() -> Outcome {
    let t = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    let d = make_windows(&t, 3).expect("7 > 3");
    let want_x = vec![
        vec![1.0, 2.0, 3.0],
        vec![2.0, 3.0, 4.0],
        vec![3.0, 4.0, 5.0],
        vec![4.0, 5.0, 6.0],
    ];
    let ok = d.inputs == want_x && d.targets == [4.0, 5.0, 6.0, 7.0];
    check(ok, format!("X={:?} Y={:?}", d.inputs, d.targets))
}

fn bands() -> Outcome {
    use InterpretationBand::*;
    let got: Vec<_> = [0.05, 0.15, 0.28, 0.60]
        .iter()
        .map(|&m| interpret_mape(m).ok())
        .collect();
    let want = vec![Some(HighlyAccurate), Some(Good), Some(Reasonable), Some(Inaccurate)];
    let a28 = accuracy_from_mape(0.28).unwrap_or(f64::NAN);
    let a26 = accuracy_from_mape(0.26).unwrap_or(f64::NAN);
    check(
        got == want && (a28 - 72.0).abs() < 1e-9 && (a26 - 74.0).abs() < 1e-9,
        format!("{got:?}; accuracy(0.28)={a28:.2}% accuracy(0.26)={a26:.2}%"),
    )
}

fn end_to_end() -> Outcome {
    let series = seasonal_series(&SyntheticConfig::default()).expect("valid synthetic series");
    let outcome = match run_walk_forward(
        &series,
        3,
        &ModelSpec::default(),
        &TrainConfig::default(),
        &PlanConfig::default(),
    ) {
        Ok(o) => o,
        Err(e) => return check(false, e.to_string()),
    };
    let lstm = outcome.report.average.mape;
    let naive = outcome.baseline.average.mape;
    let rows_ok = outcome.report.rows.iter().all(rmse_consistent);
    check(
        lstm <= 0.20 && lstm < naive && rows_ok,
        format!(
            "84 points, 1200 epochs, batch 32: average MAPE {lstm:.4} vs persistence {naive:.4}; per split {:?}",
            outcome
                .report
                .rows
                .iter()
                .map(|m| (m.mape * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        ),
    )
}

fn bundled_data() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_monthly.csv")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let run = |name: &str| -> Result<Vec<(String, Vec<u8>)>, String> {
        let config = RunConfig {
            data: Some(bundled_data()),
            out: dir.path().join(name),
            ..RunConfig::default()
        };
        let summary = cmd_evaluate(&config).map_err(|e| e.to_string())?;
        summary
            .files
            .iter()
            .map(|p| {
                let bytes = std::fs::read(p).map_err(|e| e.to_string())?;
                Ok((p.file_name().unwrap().to_string_lossy().into_owned(), bytes))
            })
            .collect()
    };
    match (run("a"), run("b")) {
        (Ok(a), Ok(b)) => {
            let identical = a == b;
            check(
                identical,
                format!("{} report files, byte-identical: {identical}", a.len()),
            )
        }
        (Err(e), _) | (_, Err(e)) => check(false, e),
    }
}

fn checkpoint_round_trip() -> Outcome {
    let series = seasonal_series(&SyntheticConfig::default()).expect("valid synthetic series");
    let spec = ModelSpec::default();
    let scaler = fit_scaler(series.values()).expect("non-constant");
    let data = make_windows(&transform(&scaler, series.values()), 3).expect("long enough");
    let config = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let (params, _) = train(&spec, &data, &config).expect("training succeeds");
    let in_memory = forecast_horizon(&spec, &params, &scaler, series.values(), 12).expect("forecast");

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("model.json");
    let ck = Checkpoint::new(spec, 3, config.seed, scaler, params);
    std::fs::write(&path, ck.to_json().expect("serialise")).expect("write");
    let loaded = match Checkpoint::load(&path) {
        Ok(c) => c,
        Err(e) => return check(false, e.to_string()),
    };
    let reloaded = loaded.forecast(series.values(), 12).expect("forecast");
    let same = loaded == ck && in_memory.iter().zip(&reloaded).all(|(a, b)| a.to_bits() == b.to_bits());
    check(same, format!("12-month forecast bit-identical after reload: {same}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("parameter counts 768/1200/13", Duration::from_secs(1), parameter_counts),
        ("gradient fidelity < 1e-6", Duration::from_secs(30), gradient_fidelity),
        ("metric oracle equivalence", Duration::from_secs(5), metric_oracle),
        ("split-plan exactness", Duration::from_secs(1), split_plan),
        ("windowing exactness", Duration::from_secs(1), windowing),
        ("interpretation bands", Duration::from_secs(1), bands),
        ("end-to-end walk-forward", Duration::from_secs(300), end_to_end),
        ("evaluate determinism", Duration::from_secs(600), determinism),
        ("checkpoint round trip", Duration::from_secs(1), checkpoint_round_trip),
    ];

    let mut failures = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let passed = outcome.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "{} {name}: {} [{:.3}s, limit {}s{}]",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!("{} of 9 acceptance criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

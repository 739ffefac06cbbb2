//! Walk-forward evaluation: split plans, forecast error metrics, MAPE
//! interpretation and the end-to-end protocol runner.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ModelSpec;
use crate::series::{fit_scaler, make_windows, transform, Period, TimeSeries, WindowedDataset};
use crate::train::{predict, train, LossHistory, TrainConfig};

/// One expanding-window split over raw series indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub splits: Vec<Split>,
}

/// Parameters of an expanding walk-forward plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub initial_train: usize,
    pub test_len: usize,
    pub splits: usize,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            initial_train: 60,
            test_len: 6,
            splits: 4,
        }
    }
}

/// Builds `k` splits: the first trains on `[0, initial_train)`, each test
/// block holds the next `test_len` indices, and every completed test block
/// joins the next split's training range.
pub fn make_walk_forward_plan(n: usize, initial_train: usize, test_len: usize, k: usize) -> Result<SplitPlan> {
    for (field, v) in [("initial_train", initial_train), ("test_len", test_len), ("splits", k)] {
        if v == 0 {
            return Err(Error::invalid(field, "must be at least 1"));
        }
    }
    if initial_train + k * test_len != n {
        return Err(Error::invalid(
            "plan",
            format!("initial_train {initial_train} + {k} x test_len {test_len} does not equal series length {n}"),
        ));
    }
    let splits = (0..k)
        .map(|s| {
            let end = initial_train + s * test_len;
            Split {
                train: 0..end,
                test: end..end + test_len,
            }
        })
        .collect();
    Ok(SplitPlan { splits })
}

/// Assigns windowed samples to a split by target index: train iff the target
/// precedes `train.end`, test iff it lies in the test range. Test windows may
/// reach back into the training range.
pub fn select_split_samples(dataset: &WindowedDataset, split: &Split) -> (WindowedDataset, WindowedDataset) {
    let train = dataset.filter_by_target(|t| t < split.train.end);
    let test = dataset.filter_by_target(|t| split.test.contains(&t));
    (train, test)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    /// Fraction, e.g. 0.28 rather than 28.
    pub mape: f64,
    pub mse: f64,
    pub rmse: f64,
}

pub fn compute_metrics(actual: &[f64], forecast: &[f64]) -> Result<Metrics> {
    if actual.is_empty() {
        return Err(Error::invalid("metrics", "no values"));
    }
    if actual.len() != forecast.len() {
        return Err(Error::dim("metrics forecast", actual.len(), forecast.len()));
    }
    if let Some(a) = actual.iter().find(|a| a.is_nan() || **a <= 0.0) {
        return Err(Error::invalid(
            "metrics",
            format!("actual value {a} must be positive for MAPE"),
        ));
    }
    let n = actual.len() as f64;
    let (mut abs, mut pct, mut sq) = (0.0, 0.0, 0.0);
    for (a, f) in actual.iter().zip(forecast) {
        let e = a - f;
        abs += e.abs();
        pct += e.abs() / a;
        sq += e * e;
    }
    let mse = sq / n;
    Ok(Metrics {
        mae: abs / n,
        mape: pct / n,
        mse,
        rmse: mse.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterpretationBand {
    HighlyAccurate,
    Good,
    Reasonable,
    Inaccurate,
}

impl fmt::Display for InterpretationBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterpretationBand::HighlyAccurate => "highly accurate forecasting",
            InterpretationBand::Good => "good forecasting",
            InterpretationBand::Reasonable => "reasonable forecasting",
            InterpretationBand::Inaccurate => "inaccurate forecasting",
        })
    }
}

/// `[0, 0.10)` highly accurate, `[0.10, 0.20)` good, `[0.20, 0.50]`
/// reasonable, above 0.50 inaccurate.
pub fn interpret_mape(mape: f64) -> Result<InterpretationBand> {
    if mape.is_nan() || mape < 0.0 {
        return Err(Error::invalid("mape", format!("{mape} must be non-negative")));
    }
    Ok(if mape < 0.10 {
        InterpretationBand::HighlyAccurate
    } else if mape < 0.20 {
        InterpretationBand::Good
    } else if mape <= 0.50 {
        InterpretationBand::Reasonable
    } else {
        InterpretationBand::Inaccurate
    })
}

/// Accuracy percentage `(1 - mape) · 100`, defined for MAPE in `[0, 1]`.
pub fn accuracy_from_mape(mape: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mape) {
        return Err(Error::invalid("mape", format!("{mape} is outside [0, 1]")));
    }
    Ok((1.0 - mape) * 100.0)
}

/// Persistence forecast: each window predicts its own last value.
pub fn naive_baseline_forecast(windows: &[Vec<f64>]) -> Result<Vec<f64>> {
    windows
        .iter()
        .map(|w| {
            w.last()
                .copied()
                .ok_or_else(|| Error::invalid("window", "empty window"))
        })
        .collect()
}

/// Per-split metric rows plus their arithmetic mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<Metrics>,
    pub average: Metrics,
}

impl MetricsReport {
    pub fn from_rows(rows: Vec<Metrics>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("report", "no splits"));
        }
        let n = rows.len() as f64;
        let mean = |f: fn(&Metrics) -> f64| rows.iter().map(f).sum::<f64>() / n;
        let average = Metrics {
            mae: mean(|m| m.mae),
            mape: mean(|m| m.mape),
            mse: mean(|m| m.mse),
            rmse: mean(|m| m.rmse),
        };
        Ok(MetricsReport { rows, average })
    }

    /// `split,mae,mape,mse,rmse` with one row per split and a final
    /// `average` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("split,mae,mape,mse,rmse\n");
        let line = |name: &str, m: &Metrics| format!("{name},{},{},{},{}\n", m.mae, m.mape, m.mse, m.rmse);
        for (k, m) in self.rows.iter().enumerate() {
            out.push_str(&line(&(k + 1).to_string(), m));
        }
        out.push_str(&line("average", &self.average));
        out
    }

    /// JSON document with the rows, the average, the MAPE band of the
    /// average and its accuracy percentage (null when MAPE exceeds 1).
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row<'a> {
            split: usize,
            #[serde(flatten)]
            metrics: &'a Metrics,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            splits: Vec<Row<'a>>,
            average: &'a Metrics,
            band: InterpretationBand,
            interpretation: String,
            accuracy_percent: Option<f64>,
        }
        let band = interpret_mape(self.average.mape)?;
        let doc = Doc {
            splits: self
                .rows
                .iter()
                .enumerate()
                .map(|(k, m)| Row {
                    split: k + 1,
                    metrics: m,
                })
                .collect(),
            average: &self.average,
            band,
            interpretation: band.to_string(),
            accuracy_percent: accuracy_from_mape(self.average.mape).ok(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::invalid("report", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub period: Period,
    pub actual: f64,
    pub predicted: f64,
    /// 1-based split number.
    pub split: usize,
}

pub fn forecast_records_csv(records: &[ForecastRecord]) -> String {
    let mut out = String::from("period,actual,predicted,split\n");
    for r in records {
        out.push_str(&format!("{},{},{},{}\n", r.period, r.actual, r.predicted, r.split));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkForwardOutcome {
    pub report: MetricsReport,
    /// Persistence baseline on exactly the same test samples.
    pub baseline: MetricsReport,
    pub records: Vec<ForecastRecord>,
    pub loss_histories: Vec<LossHistory>,
}

struct SplitResult {
    metrics: Metrics,
    baseline: Metrics,
    records: Vec<ForecastRecord>,
    history: LossHistory,
}

/// Seed for split `index` (0-based), so each split gets its own fresh
/// initialisation and dropout stream.
pub fn split_seed(seed: u64, index: usize) -> u64 {
    // SplitMix64 finaliser over the combined value.
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the full protocol: per split, fit the scaler on the training range,
/// train a fresh model, forecast the test samples and score them in original
/// units. Splits run on separate threads; results are merged in split order.
pub fn run_walk_forward(
    series: &TimeSeries,
    window: usize,
    spec: &ModelSpec,
    train_config: &TrainConfig,
    plan_config: &PlanConfig,
) -> Result<WalkForwardOutcome> {
    spec.validate()?;
    train_config.validate()?;
    if spec.window_len() != window {
        return Err(Error::dim("model window", spec.window_len(), window));
    }
    let plan = make_walk_forward_plan(
        series.len(),
        plan_config.initial_train,
        plan_config.test_len,
        plan_config.splits,
    )?;
    if plan_config.initial_train <= window {
        return Err(Error::invalid(
            "initial_train",
            format!(
                "{} leaves no training windows for window {window}",
                plan_config.initial_train
            ),
        ));
    }

    let results: Vec<Result<SplitResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = plan
            .splits
            .iter()
            .enumerate()
            .map(|(k, split)| {
                scope.spawn(move || {
                    run_split(series, window, spec, train_config, split, k).map_err(|e| Error::Split {
                        split: k + 1,
                        source: Box::new(e),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("split worker panicked"))
            .collect()
    });

    let mut rows = Vec::new();
    let mut baseline = Vec::new();
    let mut records = Vec::new();
    let mut loss_histories = Vec::new();
    for r in results {
        let r = r?;
        rows.push(r.metrics);
        baseline.push(r.baseline);
        records.extend(r.records);
        loss_histories.push(r.history);
    }
    Ok(WalkForwardOutcome {
        report: MetricsReport::from_rows(rows)?,
        baseline: MetricsReport::from_rows(baseline)?,
        records,
        loss_histories,
    })
}

fn run_split(
    series: &TimeSeries,
    window: usize,
    spec: &ModelSpec,
    train_config: &TrainConfig,
    split: &Split,
    index: usize,
) -> Result<SplitResult> {
    let values = series.values();
    let scaler = fit_scaler(&values[split.train.clone()])?;
    let scaled = make_windows(&transform(&scaler, values), window)?;
    let (train_set, test_set) = select_split_samples(&scaled, split);

    let config = TrainConfig {
        seed: split_seed(train_config.seed, index),
        ..*train_config
    };
    let (params, history) = train(spec, &train_set, &config)?;

    let predicted: Vec<f64> = predict(spec, &params, &test_set)?
        .into_iter()
        .map(|p| scaler.unscale(p))
        .collect();
    let actual: Vec<f64> = test_set.target_indices.iter().map(|&t| values[t]).collect();
    let metrics = compute_metrics(&actual, &predicted)?;

    let raw_windows: Vec<Vec<f64>> = test_set
        .target_indices
        .iter()
        .map(|&t| values[t - window..t].to_vec())
        .collect();
    let baseline = compute_metrics(&actual, &naive_baseline_forecast(&raw_windows)?)?;

    let records = test_set
        .target_indices
        .iter()
        .zip(actual.iter().zip(&predicted))
        .map(|(&t, (&a, &p))| ForecastRecord {
            period: series.labels()[t],
            actual: a,
            predicted: p,
            split: index + 1,
        })
        .collect();
    Ok(SplitResult {
        metrics,
        baseline,
        records,
        history,
    })
}

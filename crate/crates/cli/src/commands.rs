use std::fs;
use std::path::{Path, PathBuf};

use paxcast_core::eval::forecast_records_csv;
use paxcast_core::gradcheck::{self, GradCheckReport};
use paxcast_core::nn::model_backward;
use paxcast_core::synthetic::{seasonal_series, SyntheticConfig};
use paxcast_core::{
    fit_scaler, load_csv, make_windows, run_walk_forward, train, transform, Checkpoint, LossHistory, Period,
    TimeSeries, WalkForwardOutcome,
};

use crate::{CliError, RunConfig};

/// Writes every file to a temporary sibling first and renames them into
/// place only once all of them were written.
fn write_outputs(files: &[(PathBuf, String)]) -> Result<(), CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Runtime(format!("cannot write {}: {e}", p.display()));
    let mut staged = Vec::with_capacity(files.len());
    for (path, contents) in files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        let mut tmp = path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        if let Err(e) = fs::write(&tmp, contents) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(io(&tmp, e));
        }
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        fs::rename(&tmp, path).map_err(|e| io(path, e))?;
    }
    Ok(())
}

fn load_series(config: &RunConfig) -> Result<TimeSeries, CliError> {
    Ok(load_csv(config.data_path()?)?)
}

pub struct EvaluateSummary {
    pub outcome: WalkForwardOutcome,
    pub files: Vec<PathBuf>,
}

/// Walk-forward evaluation. Writes `metrics.csv`, `metrics.json`,
/// `baseline_metrics.csv`, `forecasts.csv` and one `loss_split<k>.csv` per
/// split into the output directory.
pub fn cmd_evaluate(config: &RunConfig) -> Result<EvaluateSummary, CliError> {
    config.validate()?;
    let series = load_series(config)?;
    config.validate_for_length(series.len())?;

    let outcome = run_walk_forward(
        &series,
        config.window,
        &config.model_spec(),
        &config.train_config(),
        &config.plan_config(),
    )?;

    let out = &config.out;
    let mut files = vec![
        (out.join("metrics.csv"), outcome.report.to_csv()),
        (out.join("metrics.json"), outcome.report.to_json()?),
        (out.join("baseline_metrics.csv"), outcome.baseline.to_csv()),
        (out.join("forecasts.csv"), forecast_records_csv(&outcome.records)),
    ];
    for (k, h) in outcome.loss_histories.iter().enumerate() {
        files.push((out.join(format!("loss_split{}.csv", k + 1)), h.to_csv()));
    }
    write_outputs(&files)?;
    Ok(EvaluateSummary {
        outcome,
        files: files.into_iter().map(|(p, _)| p).collect(),
    })
}

pub struct TrainSummary {
    pub checkpoint: Checkpoint,
    pub checkpoint_path: PathBuf,
    pub history: LossHistory,
}

pub fn default_checkpoint_path(config: &RunConfig) -> PathBuf {
    config.out.join("model.json")
}

/// Trains on every window of the full series and writes a checkpoint plus
/// `train_loss.csv`.
pub fn cmd_train(config: &RunConfig, checkpoint_path: Option<&Path>) -> Result<TrainSummary, CliError> {
    config.validate()?;
    let series = load_series(config)?;
    let spec = config.model_spec();
    let train_config = config.train_config();

    let scaler = fit_scaler(series.values())?;
    let dataset = make_windows(&transform(&scaler, series.values()), config.window)?;
    let (params, history) = train(&spec, &dataset, &train_config)?;
    let checkpoint = Checkpoint::new(spec, config.window, config.seed, scaler, params);

    let checkpoint_path = checkpoint_path.map_or_else(|| default_checkpoint_path(config), Path::to_path_buf);
    write_outputs(&[
        (checkpoint_path.clone(), checkpoint.to_json()?),
        (config.out.join("train_loss.csv"), history.to_csv()),
    ])?;
    Ok(TrainSummary {
        checkpoint,
        checkpoint_path,
        history,
    })
}

/// Iterated forecast of `horizon` months past the end of the configured
/// series. Writes `forecast.csv` (`period,predicted`).
pub fn cmd_forecast(
    config: &RunConfig,
    checkpoint_path: &Path,
    horizon: usize,
) -> Result<Vec<(Period, f64)>, CliError> {
    if horizon == 0 {
        return Err(CliError::Validation("--horizon must be at least 1".into()));
    }
    let series = load_series(config)?;
    let checkpoint = Checkpoint::load(checkpoint_path)
        .map_err(|e| CliError::Validation(format!("invalid checkpoint {}: {e}", checkpoint_path.display())))?;
    let predicted = checkpoint.forecast(series.values(), horizon)?;
    if let Some(bad) = predicted.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Runtime(format!(
            "forecast produced a non-finite value ({bad})"
        )));
    }
    let rows = label_forecasts(series.last_period(), &predicted);

    let mut csv = String::from("period,predicted\n");
    for (p, v) in &rows {
        csv.push_str(&format!("{p},{v}\n"));
    }
    write_outputs(&[(config.out.join("forecast.csv"), csv)])?;
    Ok(rows)
}

/// Attaches consecutive month labels following `last`.
pub fn label_forecasts(last: Period, predicted: &[f64]) -> Vec<(Period, f64)> {
    std::iter::successors(Some(last.succ()), |p| Some(p.succ()))
        .zip(predicted.iter().copied())
        .collect()
}

pub const GRADCHECK_CONFIGS: usize = 24;

/// Full-stack finite-difference check. Fails with the offending parameter
/// when the worst relative error reaches the tolerance.
pub fn cmd_gradcheck(seed: u64, corrupt_backward: bool) -> Result<GradCheckReport, CliError> {
    let backward = if corrupt_backward {
        gradcheck::corrupted_backward
    } else {
        model_backward
    };
    let report = gradcheck::run_gradcheck(seed, GRADCHECK_CONFIGS, backward)?;
    if report.passed() {
        Ok(report)
    } else {
        Err(CliError::Runtime(format!(
            "gradient check failed: max relative error {:e} at {} (tolerance {:e})",
            report.max_rel_error,
            report.worst,
            gradcheck::TOLERANCE
        )))
    }
}

/// Writes the default seeded synthetic series as a `period,passengers` CSV.
pub fn cmd_synth(path: &Path, seed: u64) -> Result<TimeSeries, CliError> {
    let series = seasonal_series(&SyntheticConfig {
        seed,
        ..SyntheticConfig::default()
    })?;
    let mut csv = String::from("period,passengers\n");
    for (p, v) in series.labels().iter().zip(series.values()) {
        csv.push_str(&format!("{p},{}\n", v.round()));
    }
    write_outputs(&[(path.to_path_buf(), csv)])?;
    Ok(series)
}

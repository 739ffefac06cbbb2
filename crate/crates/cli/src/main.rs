use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use paxcast_cli::commands::{default_checkpoint_path, EvaluateSummary};
use paxcast_cli::{cmd_evaluate, cmd_forecast, cmd_gradcheck, cmd_synth, cmd_train, CliError, Overrides, RunConfig};
use paxcast_core::{accuracy_from_mape, interpret_mape};

/// Two-layer LSTM forecasting of monthly passenger counts.
#[derive(Debug, Parser)]
#[command(name = "paxcast", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `period,passengers` CSV file.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    batch: Option<usize>,
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Months to forecast.
    #[arg(long, global = true, default_value_t = 6)]
    horizon: usize,
    /// Checkpoint to write (train) or read (forecast).
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on the whole series and save a checkpoint.
    Train,
    /// Run the walk-forward protocol and write metric reports.
    Evaluate,
    /// Forecast future months from a checkpoint.
    Forecast,
    /// Check analytic gradients against finite differences.
    Gradcheck {
        /// Swap in a deliberately broken backward pass.
        #[arg(long, hide = true)]
        corrupt_backward: bool,
    },
    /// Write a seeded synthetic monthly series to `--data`.
    Synth,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            data: self.data.clone(),
            seed: self.seed,
            epochs: self.epochs,
            batch: self.batch,
            window: self.window,
            out: self.out.clone(),
        }
    }

    fn run_config(&self) -> Result<RunConfig, CliError> {
        RunConfig::resolve(self.config.as_deref(), &self.overrides())
    }
}

fn print_evaluation(summary: &EvaluateSummary) {
    let report = &summary.outcome.report;
    println!("split  {:>14} {:>8} {:>20} {:>14}", "MAE", "MAPE", "MSE", "RMSE");
    for (k, m) in report.rows.iter().enumerate() {
        println!(
            "{:<6} {:>14.2} {:>8.4} {:>20.2} {:>14.2}",
            k + 1,
            m.mae,
            m.mape,
            m.mse,
            m.rmse
        );
    }
    let a = &report.average;
    println!(
        "{:<6} {:>14.2} {:>8.4} {:>20.2} {:>14.2}",
        "avg", a.mae, a.mape, a.mse, a.rmse
    );
    let band = interpret_mape(a.mape).map(|b| b.to_string()).unwrap_or_default();
    match accuracy_from_mape(a.mape) {
        Ok(acc) => println!("average MAPE {:.4} ({band}), accuracy {acc:.2}%", a.mape),
        Err(_) => println!("average MAPE {:.4} ({band})", a.mape),
    }
    println!(
        "persistence baseline average MAPE {:.4}",
        summary.outcome.baseline.average.mape
    );
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Evaluate => {
            let summary = cmd_evaluate(&cli.run_config()?)?;
            print_evaluation(&summary);
        }
        Command::Train => {
            let config = cli.run_config()?;
            let summary = cmd_train(&config, cli.checkpoint.as_deref())?;
            println!(
                "trained {} epochs, final loss {:.6e}; checkpoint {}",
                summary.history.0.len(),
                summary.history.last().unwrap_or(f64::NAN),
                summary.checkpoint_path.display()
            );
        }
        Command::Forecast => {
            let config = cli.run_config()?;
            let path = cli
                .checkpoint
                .clone()
                .unwrap_or_else(|| default_checkpoint_path(&config));
            println!("period,predicted");
            for (p, v) in cmd_forecast(&config, &path, cli.horizon)? {
                println!("{p},{v}");
            }
        }
        Command::Gradcheck { corrupt_backward } => {
            let report = cmd_gradcheck(cli.seed.unwrap_or(0), *corrupt_backward)?;
            println!(
                "gradient check passed: {} configurations, {} values, max relative error {:e} ({})",
                report.configs, report.values_checked, report.max_rel_error, report.worst
            );
        }
        Command::Synth => {
            let path = cli
                .data
                .clone()
                .ok_or_else(|| CliError::Validation("synth needs --data <path> to write to".into()))?;
            let series = cmd_synth(&path, cli.seed.unwrap_or(2016))?;
            println!("wrote {} months to {}", series.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("paxcast: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Univariate monthly forecasting with a two-layer LSTM.
//!
//! The crate is organised bottom-up:
//!
//! - [`series`]: CSV ingestion, month labels, min-max scaling and sliding windows.
//! - [`nn`]: the LSTM cell, dropout, dense head, the stacked model and its exact gradients.
//! - [`train`]: MSE loss, Adam, parameter initialisation and the mini-batch loop.
//! - [`eval`]: walk-forward split plans, forecast metrics, MAPE bands and the protocol runner.
//! - [`gradcheck`]: finite-difference verification of the analytic gradients.
//! - [`synthetic`]: seeded seasonal test series.

pub mod error;
pub mod eval;
pub mod forecast;
pub mod gradcheck;
pub mod nn;
pub mod series;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};
pub use eval::{
    accuracy_from_mape, compute_metrics, interpret_mape, make_walk_forward_plan, naive_baseline_forecast,
    run_walk_forward, select_split_samples, ForecastRecord, InterpretationBand, Metrics, MetricsReport, PlanConfig,
    Split, SplitPlan, WalkForwardOutcome,
};
pub use forecast::{forecast_horizon, Checkpoint};
pub use nn::{Matrix, Mode, ModelParams, ModelSpec};
pub use series::{
    fit_scaler, inverse_transform, load_csv, make_windows, transform, Period, ScalerParams, TimeSeries, WindowedDataset,
};
pub use train::{init_params, train, AdamConfig, AdamState, LossHistory, TrainConfig};

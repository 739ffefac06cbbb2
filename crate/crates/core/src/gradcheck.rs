//! Central finite-difference verification of the full-stack gradients.
//!
//! The numerical side only ever calls the inference-mode forward pass, so it
//! is independent of the backward implementation it checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::nn::{model_backward, model_forward, Mode, ModelCache, ModelParams, ModelSpec, ParamSet};

/// Names of the [`ParamSet`] slices of [`ModelParams`], in order.
pub const PARAM_NAMES: [&str; 18] = [
    "lstm1.w_input",
    "lstm1.w_forget",
    "lstm1.w_candidate",
    "lstm1.w_output",
    "lstm1.b_input",
    "lstm1.b_forget",
    "lstm1.b_candidate",
    "lstm1.b_output",
    "lstm2.w_input",
    "lstm2.w_forget",
    "lstm2.w_candidate",
    "lstm2.w_output",
    "lstm2.b_input",
    "lstm2.b_forget",
    "lstm2.b_candidate",
    "lstm2.b_output",
    "dense.w",
    "dense.b",
];

pub const DEFAULT_EPS: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-6;

/// `|a - n| / max(|a|, |n|, 1e-4)`. The floor keeps gradients that are
/// zero up to rounding from dominating; above it the measure is purely
/// relative.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4)
}

/// Signature of a backward pass, so that a deliberately broken one can be
/// swapped in to confirm the checker notices.
pub type BackwardFn = fn(&ModelSpec, &ModelParams, &ModelCache, f64, &mut ModelParams) -> Result<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub configs: usize,
    pub values_checked: usize,
    pub max_rel_error: f64,
    /// Parameter (or `window`) entry with the largest error, e.g.
    /// `lstm2.w_forget[7]`.
    pub worst: String,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < TOLERANCE
    }
}

/// Checks `∂prediction/∂(every weight, bias and window value)` for one
/// configuration against central differences with step `eps`.
pub fn check_model(
    spec: &ModelSpec,
    params: &ModelParams,
    window: &[f64],
    eps: f64,
    backward: BackwardFn,
) -> Result<GradCheckReport> {
    let (_, cache) = model_forward(spec, params, window, &mut Mode::Infer)?;
    let mut grads = ModelParams::zeros(spec);
    let grad_window = backward(spec, params, &cache, 1.0, &mut grads)?;

    let f = |p: &ModelParams, w: &[f64]| -> Result<f64> { Ok(model_forward(spec, p, w, &mut Mode::Infer)?.0) };
    let mut report = GradCheckReport {
        configs: 1,
        values_checked: 0,
        max_rel_error: 0.0,
        worst: String::new(),
    };
    let mut record = |name: String, analytic: f64, numeric: f64| {
        let e = relative_error(analytic, numeric);
        report.values_checked += 1;
        if e > report.max_rel_error || report.worst.is_empty() {
            report.max_rel_error = e;
            report.worst = name;
        }
    };

    let analytic = grads.slices();
    let mut probe = params.clone();
    for (s, name) in PARAM_NAMES.iter().enumerate() {
        for (k, &a) in analytic[s].iter().enumerate() {
            let orig = probe.slices()[s][k];
            probe.slices_mut()[s][k] = orig + eps;
            let up = f(&probe, window)?;
            probe.slices_mut()[s][k] = orig - eps;
            let down = f(&probe, window)?;
            probe.slices_mut()[s][k] = orig;
            record(format!("{name}[{k}]"), a, (up - down) / (2.0 * eps));
        }
    }
    let mut w = window.to_vec();
    for k in 0..w.len() {
        let orig = w[k];
        w[k] = orig + eps;
        let up = f(params, &w)?;
        w[k] = orig - eps;
        let down = f(params, &w)?;
        w[k] = orig;
        record(format!("window[{k}]"), grad_window[k], (up - down) / (2.0 * eps));
    }
    Ok(report)
}

/// Draws a small random network shape, weights and window.
pub fn random_config(rng: &mut ChaCha8Rng) -> (ModelSpec, ModelParams, Vec<f64>) {
    let spec = ModelSpec {
        input_dim: rng.random_range(1..=3),
        timesteps: rng.random_range(1..=3),
        hidden1: rng.random_range(1..=4),
        hidden2: rng.random_range(1..=4),
        dropout_rate: 0.2,
        output_dim: 1,
    };
    let mut params = ModelParams::zeros(&spec);
    for s in params.slices_mut() {
        for v in s {
            *v = rng.random_range(-0.8..0.8);
        }
    }
    let window = (0..spec.window_len()).map(|_| rng.random_range(0.0..1.0)).collect();
    (spec, params, window)
}

/// Runs [`check_model`] on `configs` random configurations, including the
/// full default-size network as the first one.
pub fn run_gradcheck(seed: u64, configs: usize, backward: BackwardFn) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = GradCheckReport {
        configs: 0,
        values_checked: 0,
        max_rel_error: 0.0,
        worst: String::new(),
    };
    for c in 0..configs {
        let (spec, params, window) = if c == 0 {
            let spec = ModelSpec::default();
            let params = crate::train::init_params(&spec, rng.random());
            let window = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
            (spec, params, window)
        } else {
            random_config(&mut rng)
        };
        let r = check_model(&spec, &params, &window, DEFAULT_EPS, backward)?;
        total.configs += 1;
        total.values_checked += r.values_checked;
        if r.max_rel_error > total.max_rel_error || total.worst.is_empty() {
            total.max_rel_error = r.max_rel_error;
            total.worst = format!("config {c}: {}", r.worst);
        }
    }
    Ok(total)
}

/// The real backward pass with one gradient deliberately scaled, used to
/// confirm that the checker detects a broken implementation.
pub fn corrupted_backward(
    spec: &ModelSpec,
    params: &ModelParams,
    cache: &ModelCache,
    grad_pred: f64,
    grads: &mut ModelParams,
) -> Result<Vec<f64>> {
    let gw = model_backward(spec, params, cache, grad_pred, grads)?;
    for b in &mut grads.lstm2.b_output {
        *b *= 1.01;
    }
    Ok(gw)
}

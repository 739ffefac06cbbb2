//! Model checkpoints and iterated multi-step forecasting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{model_forward, Mode, ModelParams, ModelSpec};
use crate::series::ScalerParams;

const FORMAT: &str = "paxcast-checkpoint";
const VERSION: u32 = 1;

/// Everything needed to forecast from a trained model: dimensions, dropout
/// rate, the seed it was trained with, the fitted scaler and every weight
/// array with its shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub spec: ModelSpec,
    pub window: usize,
    pub seed: u64,
    pub scaler: ScalerParams,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn new(spec: ModelSpec, window: usize, seed: u64, scaler: ScalerParams, params: ModelParams) -> Self {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            spec,
            window,
            seed,
            scaler,
            params,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        ck.validate()?;
        Ok(ck)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format {} v{}",
                self.format, self.version
            )));
        }
        self.spec.validate()?;
        if self.spec.window_len() != self.window {
            return Err(Error::Checkpoint(format!(
                "window {} does not match model input of {}",
                self.window,
                self.spec.window_len()
            )));
        }
        ScalerParams::new(self.scaler.min, self.scaler.max)?;
        self.params
            .check_shapes(&self.spec)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(())
    }

    pub fn forecast(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        forecast_horizon(&self.spec, &self.params, &self.scaler, history, horizon)
    }
}

/// Forecasts `horizon` steps past the end of `history` (original units),
/// feeding each scaled prediction back into the input window.
pub fn forecast_horizon(
    spec: &ModelSpec,
    params: &ModelParams,
    scaler: &ScalerParams,
    history: &[f64],
    horizon: usize,
) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be at least 1"));
    }
    let w = spec.window_len();
    if history.len() < w {
        return Err(Error::Series(format!(
            "need at least {w} observations to forecast, have {}",
            history.len()
        )));
    }
    let mut window: Vec<f64> = history[history.len() - w..].iter().map(|&v| scaler.scale(v)).collect();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let (p, _) = model_forward(spec, params, &window, &mut Mode::Infer)?;
        out.push(scaler.unscale(p));
        window.remove(0);
        window.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::init_params;

    #[test]
    fn json_round_trip_is_bit_exact() {
        let spec = ModelSpec::default();
        let params = init_params(&spec, 5);
        let ck = Checkpoint::new(spec, 3, 5, ScalerParams::new(1234.5, 98765.4321).unwrap(), params);
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back, ck);
        use crate::nn::ParamSet;
        for (a, b) in ck.params.slices().iter().zip(back.params.slices()) {
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn rejects_inconsistent_checkpoint() {
        let spec = ModelSpec::default();
        let mut ck = Checkpoint::new(spec, 3, 1, ScalerParams::new(0.0, 1.0).unwrap(), init_params(&spec, 1));
        ck.window = 4;
        assert!(Checkpoint::from_json(&ck.to_json().unwrap()).is_err());
        assert!(Checkpoint::from_json("{\"format\": 1}").is_err());
    }

    #[test]
    fn horizon_feeds_back() {
        let spec = ModelSpec::default();
        let params = init_params(&spec, 3);
        let scaler = ScalerParams::new(100.0, 200.0).unwrap();
        let hist = [120.0, 150.0, 170.0, 160.0];
        let three = forecast_horizon(&spec, &params, &scaler, &hist, 3).unwrap();
        let one = forecast_horizon(&spec, &params, &scaler, &hist, 1).unwrap();
        assert_eq!(one[0], three[0]);
        let mut extended = hist.to_vec();
        extended.push(three[0]);
        let next = forecast_horizon(&spec, &params, &scaler, &extended, 1).unwrap();
        assert!((next[0] - three[1]).abs() < 1e-9);
        assert!(forecast_horizon(&spec, &params, &scaler, &hist, 0).is_err());
        assert!(forecast_horizon(&spec, &params, &scaler, &hist[..2], 1).is_err());
    }
}

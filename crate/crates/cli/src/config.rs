//! Run configuration: one flat TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use paxcast_core::train::AdamConfig;
use paxcast_core::{ModelSpec, PlanConfig, TrainConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub window: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub shuffle: bool,
    pub initial_train: usize,
    pub test_len: usize,
    pub splits: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = ModelSpec::default();
        let train = TrainConfig::default();
        let plan = PlanConfig::default();
        RunConfig {
            data: None,
            window: spec.input_dim,
            hidden1: spec.hidden1,
            hidden2: spec.hidden2,
            dropout: spec.dropout_rate,
            epochs: train.epochs,
            batch: train.batch_size,
            lr: train.adam.lr,
            beta1: train.adam.beta1,
            beta2: train.adam.beta2,
            adam_eps: train.adam.eps,
            seed: train.seed,
            shuffle: train.shuffle,
            initial_train: plan.initial_train,
            test_len: plan.test_len,
            splits: plan.splits,
            out: PathBuf::from("out"),
        }
    }
}

/// Values given on the command line; each one that is set wins over the
/// config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub window: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    /// Loads `path` if given (defaults otherwise), applies `overrides` and
    /// validates the result.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut config = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.data {
            self.data = Some(d.clone());
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.epochs {
            self.epochs = v;
        }
        if let Some(v) = o.batch {
            self.batch = v;
        }
        if let Some(v) = o.window {
            self.window = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            input_dim: self.window,
            timesteps: 1,
            hidden1: self.hidden1,
            hidden2: self.hidden2,
            dropout_rate: self.dropout,
            output_dim: 1,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            adam: AdamConfig {
                lr: self.lr,
                beta1: self.beta1,
                beta2: self.beta2,
                eps: self.adam_eps,
            },
            seed: self.seed,
            shuffle: self.shuffle,
        }
    }

    pub fn plan_config(&self) -> PlanConfig {
        PlanConfig {
            initial_train: self.initial_train,
            test_len: self.test_len,
            splits: self.splits,
        }
    }

    /// Every check that does not need the data file.
    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, msg: &str| Err(CliError::Validation(format!("config field `{name}`: {msg}")));
        if self.window == 0 {
            return field("window", "must be at least 1");
        }
        if self.epochs == 0 {
            return field("epochs", "must be at least 1");
        }
        if self.batch == 0 {
            return field("batch", "must be at least 1");
        }
        if self.hidden1 == 0 {
            return field("hidden1", "must be at least 1");
        }
        if self.hidden2 == 0 {
            return field("hidden2", "must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return field("dropout", "must lie in [0, 1)");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return field("lr", "must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return field("beta1", "must lie in (0, 1)");
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return field("beta2", "must lie in (0, 1)");
        }
        if !(self.adam_eps.is_finite() && self.adam_eps > 0.0) {
            return field("adam_eps", "must be positive");
        }
        if self.initial_train == 0 {
            return field("initial_train", "must be at least 1");
        }
        if self.initial_train <= self.window {
            return field(
                "initial_train",
                "must exceed the window so the first split has training samples",
            );
        }
        if self.test_len == 0 {
            return field("test_len", "must be at least 1");
        }
        if self.splits == 0 {
            return field("splits", "must be at least 1");
        }
        Ok(())
    }

    /// Checks the split arithmetic against the loaded series length.
    pub fn validate_for_length(&self, n: usize) -> Result<(), CliError> {
        let needed = self.initial_train + self.splits * self.test_len;
        if needed != n {
            return Err(CliError::Validation(format!(
                "config fields `initial_train` + `splits` x `test_len` = {needed} but the series has {n} points"
            )));
        }
        Ok(())
    }

    pub fn data_path(&self) -> Result<&Path, CliError> {
        self.data
            .as_deref()
            .ok_or_else(|| CliError::Validation("config field `data`: no data file given (use --data)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_protocol() {
        let c = RunConfig::default();
        assert_eq!((c.window, c.epochs, c.batch), (3, 1200, 32));
        assert_eq!((c.initial_train, c.test_len, c.splits), (60, 6, 4));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn file_values_and_flag_precedence() {
        let mut c = RunConfig::from_toml("epochs = 50\nseed = 3\nout = \"results\"\n").unwrap();
        assert_eq!((c.epochs, c.seed), (50, 3));
        c.apply(&Overrides {
            epochs: Some(10),
            ..Overrides::default()
        });
        assert_eq!((c.epochs, c.seed), (10, 3));
        assert_eq!(c.out, PathBuf::from("results"));
    }

    #[test]
    fn errors_name_the_field() {
        let c = RunConfig::from_toml("epochs = 0").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("epochs"));
        let c = RunConfig::from_toml("dropout = 1.5").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("dropout"));
        assert!(RunConfig::from_toml("epoch = 3").is_err());
        let c = RunConfig::default();
        assert!(c
            .validate_for_length(80)
            .unwrap_err()
            .to_string()
            .contains("initial_train"));
        assert!(c.validate_for_length(84).is_ok());
    }
}

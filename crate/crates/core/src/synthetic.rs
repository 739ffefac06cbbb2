//! Seeded synthetic monthly series: linear trend plus a 12-month sinusoid,
//! with multiplicative Gaussian noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::series::{Period, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub len: usize,
    pub start: Period,
    pub base: f64,
    /// Added per month.
    pub trend: f64,
    pub amplitude: f64,
    pub period: f64,
    /// Standard deviation of the multiplicative noise, as a fraction.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    /// 84 months from 2016-01 of passenger-like counts with a strong annual
    /// cycle and 5% noise.
    fn default() -> Self {
        SyntheticConfig {
            len: 84,
            start: Period::new(2016, 1).expect("valid month"),
            base: 200_000.0,
            trend: 1_000.0,
            amplitude: 50_000.0,
            period: 12.0,
            noise: 0.05,
            seed: 2016,
        }
    }
}

pub fn seasonal_series(config: &SyntheticConfig) -> Result<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let values = (0..config.len)
        .map(|k| {
            let t = k as f64;
            let level = config.base
                + config.trend * t
                + config.amplitude * (2.0 * std::f64::consts::PI * t / config.period).sin();
            let eps: f64 = rng.sample(StandardNormal);
            // Clamp keeps counts positive even for extreme draws.
            (level * (1.0 + config.noise * eps)).max(1.0)
        })
        .collect();
    TimeSeries::from_values(config.start, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_series_shape() {
        let s = seasonal_series(&SyntheticConfig::default()).unwrap();
        assert_eq!(s.len(), 84);
        assert_eq!(s.labels()[0].to_string(), "2016-01");
        assert_eq!(s.last_period().to_string(), "2022-12");
        assert!(s.values().iter().all(|&v| v > 0.0));
        assert_eq!(s, seasonal_series(&SyntheticConfig::default()).unwrap());
    }

    #[test]
    fn noise_free_is_exact() {
        let cfg = SyntheticConfig {
            noise: 0.0,
            len: 13,
            ..SyntheticConfig::default()
        };
        let s = seasonal_series(&cfg).unwrap();
        assert!((s.values()[3] - (203_000.0 + 50_000.0)).abs() < 1e-6);
        assert!((s.values()[12] - 212_000.0).abs() < 1e-6);
    }
}

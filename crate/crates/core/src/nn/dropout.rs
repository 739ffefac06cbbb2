use rand::Rng;

use crate::error::{Error, Result};

/// Forward-pass mode. Training draws dropout masks from the supplied
/// generator; inference is deterministic and dropout-free.
pub enum Mode<'a> {
    Infer,
    Train(&'a mut dyn rand::RngCore),
}

impl Mode<'_> {
    pub fn is_train(&self) -> bool {
        matches!(self, Mode::Train(_))
    }
}

/// Inverted dropout. In training each component is zeroed with probability
/// `rate` and survivors are scaled by `1 / (1 - rate)`; the returned mask
/// holds those per-component factors. Inference passes `x` through and
/// returns an all-ones mask.
pub fn dropout_forward(rate: f64, x: &[f64], mode: &mut Mode<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::invalid("dropout rate", format!("{rate} is outside [0, 1)")));
    }
    match mode {
        Mode::Train(rng) if rate > 0.0 => {
            let keep = 1.0 / (1.0 - rate);
            let mask: Vec<f64> = x
                .iter()
                .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
                .collect();
            let y = x.iter().zip(&mask).map(|(v, m)| v * m).collect();
            Ok((y, mask))
        }
        _ => Ok((x.to_vec(), vec![1.0; x.len()])),
    }
}

pub fn dropout_backward(mask: &[f64], grad_y: &[f64]) -> Vec<f64> {
    grad_y.iter().zip(mask).map(|(g, m)| g * m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rate_zero_is_identity() {
        let x = vec![1.0, -2.0, 3.5];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(dropout_forward(0.0, &x, &mut Mode::Train(&mut rng)).unwrap().0, x);
        assert_eq!(dropout_forward(0.0, &x, &mut Mode::Infer).unwrap().0, x);
    }

    #[test]
    fn inference_passes_through() {
        let x = vec![0.3, 0.7];
        let (y, mask) = dropout_forward(0.2, &x, &mut Mode::Infer).unwrap();
        assert_eq!(y, x);
        assert_eq!(mask, vec![1.0, 1.0]);
    }

    #[test]
    fn invalid_rate() {
        assert!(dropout_forward(1.0, &[1.0], &mut Mode::Infer).is_err());
        assert!(dropout_forward(-0.1, &[1.0], &mut Mode::Infer).is_err());
    }

    #[test]
    fn survivor_statistics() {
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|k| 1.0 + (k % 7) as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (y, mask) = dropout_forward(0.5, &x, &mut Mode::Train(&mut rng)).unwrap();
        let survivors = mask.iter().filter(|&&m| m > 0.0).count() as f64 / n as f64;
        assert!((survivors - 0.5).abs() < 0.01, "survivor fraction {survivors}");
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, my) = (mean(&x), mean(&y));
        assert!((my - mx).abs() / mx < 0.02, "mean {my} vs {mx}");
        assert_eq!(dropout_backward(&mask, &vec![1.0; n]), mask);
    }

    #[test]
    fn same_seed_same_mask() {
        let x = vec![1.0; 64];
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let ya = dropout_forward(0.3, &x, &mut Mode::Train(&mut a)).unwrap();
        let yb = dropout_forward(0.3, &x, &mut Mode::Train(&mut b)).unwrap();
        assert_eq!(ya, yb);
    }
}

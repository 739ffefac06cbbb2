/// Logistic sigmoid `1 / (1 + e^{-x})`, evaluated without overflow for any
/// finite `x`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Hyperbolic tangent `(e^x - e^{-x}) / (e^x + e^{-x})`.
pub fn tanh_act(x: f64) -> f64 {
    // std's tanh saturates cleanly instead of forming inf/inf.
    x.tanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(tanh_act(0.0), 0.0);
    }

    #[test]
    fn sigmoid_extremes_do_not_overflow() {
        // 1/(1+e^-500): e^-500 ≈ 7.1e-218 vanishes against 1 in f64.
        assert_eq!(sigmoid(500.0), 1.0);
        // e^-500/(1+e^-500) ≈ 7.124576406741286e-218 (50-digit reference).
        let s = sigmoid(-500.0);
        assert!(s > 0.0);
        assert!((s - 7.124_576_406_741_286e-218).abs() / 7.124_576_406_741_286e-218 < 1e-12);
        assert!(sigmoid(700.0).is_finite() && sigmoid(-700.0).is_finite());
        assert!(sigmoid(-700.0) > 0.0);
    }

    #[test]
    fn tanh_large_arguments() {
        assert_eq!(tanh_act(500.0), 1.0);
        assert_eq!(tanh_act(-500.0), -1.0);
    }

    proptest! {
        #[test]
        fn sigmoid_symmetry(x in -40.0f64..40.0) {
            prop_assert!((sigmoid(x) - (1.0 - sigmoid(-x))).abs() <= 1e-15);
        }

        #[test]
        fn tanh_odd(x in -40.0f64..40.0) {
            prop_assert!((tanh_act(-x) + tanh_act(x)).abs() <= 1e-15);
        }

        #[test]
        fn tanh_sigmoid_identity(x in -40.0f64..40.0) {
            prop_assert!((tanh_act(x) - (2.0 * sigmoid(2.0 * x) - 1.0)).abs() <= 1e-12);
        }
    }
}

//! Planar duality of the wired and free random-cluster models with `q = 2`.

use crate::error::{Error, Result};

/// Dual bond parameter `p* = (2 - 2p) / (2 - p)`.
pub fn dual_p(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "bond probability {p} outside [0, 1]"
        )));
    }
    Ok((2.0 - 2.0 * p) / (2.0 - p))
}

/// Dual inverse temperature, obtained at the bond level: with
/// `p = 1 - e^{-2 beta}` and `p* = dual_p(p)`, `beta* = -ln(1 - p*) / 2`.
///
/// Since `1 - p* = p / (2 - p) = tanh(beta)`, this equals
/// `-ln(tanh beta) / 2`. `beta = +inf` maps to `0`; `beta -> 0` maps to
/// `+inf`.
pub fn dual_beta(beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "inverse temperature {beta} must be positive"
        )));
    }
    let p = -(-2.0 * beta).exp_m1();
    // 1 - dual_p(p), written without cancellation.
    let q = p / (2.0 - p);
    Ok(-0.5 * q.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::BETA_C;
    use proptest::prelude::*;

    #[test]
    fn endpoints_and_fixed_point() {
        assert_eq!(dual_p(1.0).unwrap(), 0.0);
        assert_eq!(dual_p(0.0).unwrap(), 1.0);
        let f = 2.0 - 2f64.sqrt();
        assert!((dual_p(f).unwrap() - f).abs() < 1e-12);
        assert!(dual_p(1.5).is_err());
    }

    #[test]
    fn critical_point_is_self_dual() {
        assert!((dual_beta(BETA_C).unwrap() - BETA_C).abs() < 1e-12);
        // e^{-2 beta_c} = sqrt 2 - 1 = tanh beta_c
        assert!(((-2.0 * BETA_C).exp() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((BETA_C.tanh() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let p_c = -(-2.0 * BETA_C).exp_m1();
        assert!((p_c - (2.0 - 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn extremes() {
        assert_eq!(dual_beta(f64::INFINITY).unwrap(), 0.0);
        assert!(dual_beta(1e-300).unwrap() > 340.0);
        assert!(dual_beta(0.0).is_err());
        assert!(dual_beta(0.6).unwrap() < BETA_C);
    }

    proptest! {
        #[test]
        fn dual_p_is_involution(p in 0.0f64..=1.0) {
            let back = dual_p(dual_p(p).unwrap()).unwrap();
            prop_assert!((back - p).abs() < 1e-12);
        }

        #[test]
        fn dual_beta_is_involution(beta in 0.01f64..5.0) {
            let back = dual_beta(dual_beta(beta).unwrap()).unwrap();
            prop_assert!((back - beta).abs() < 1e-9 * beta.max(1.0));
        }

        #[test]
        fn matches_tanh_form(beta in 0.01f64..8.0) {
            let d = dual_beta(beta).unwrap();
            prop_assert!(((-2.0 * d).exp() - beta.tanh()).abs() < 1e-12);
        }
    }
}

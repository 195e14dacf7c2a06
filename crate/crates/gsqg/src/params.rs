//! Model parameters and the boundary-stretching coordinates.
//!
//! The pair `(alpha, beta)` fixes the Biot–Savart exponent and the power of
//! the boundary weight in the function space. The vertical stretching
//! `lambda_beta` turns the weighted space into plain Lipschitz functions;
//! `kappa_beta` is the weight itself and at the same time the derivative of
//! the stretching, `lambda' = kappa ∘ lambda`.

use serde::{Deserialize, Serialize};

use crate::error::{GsqgError, Result};

/// Biot–Savart exponent `alpha` in (0, 1/2) and boundary-weight power
/// `beta` in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    alpha: f64,
    beta: f64,
}

/// Well-posedness regime of a parameter pair.
///
/// The equation is locally well-posed in the weighted space exactly when
/// `alpha <= 1/4` and `beta` lies in `[2 alpha, 1 - 2 alpha]`. Below that
/// window the normal derivative of the tangential velocity is too singular
/// for the space; above it the tangential derivative of the normal velocity
/// is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    WellPosed,
    IllPosedLow,
    IllPosedHigh,
}

impl Params {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) || !alpha.is_finite() {
            return Err(GsqgError::InvalidParameter(format!(
                "alpha must lie in (0, 1/2), got {alpha}"
            )));
        }
        if !(0.0..1.0).contains(&beta) || !beta.is_finite() {
            return Err(GsqgError::InvalidParameter(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        Ok(Params { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Classify the pair. Total on valid parameters: every pair falls in
    /// exactly one regime.
    pub fn classify(&self) -> Regime {
        if self.beta < 2.0 * self.alpha {
            Regime::IllPosedLow
        } else if self.beta > 1.0 - 2.0 * self.alpha {
            Regime::IllPosedHigh
        } else {
            // beta in [2 alpha, 1 - 2 alpha], nonempty only when alpha <= 1/4
            Regime::WellPosed
        }
    }
}

/// The boundary weight `kappa_beta(x2) = min(x2^beta, 1)`.
///
/// Requires `x2 >= 0`; clamps to 1 from `x2 = 1` on.
pub fn kappa_beta(beta: f64, x2: f64) -> f64 {
    debug_assert!(x2 >= 0.0, "kappa_beta requires x2 >= 0");
    if x2 >= 1.0 || beta == 0.0 {
        1.0
    } else {
        x2.powf(beta)
    }
}

/// The vertical stretching of the half-plane.
///
/// Below the matching point `(1-beta)^{-1}` the map is the pure power
/// `((1-beta) x2)^{1/(1-beta)}`; above it is the shifted identity
/// `x2 - beta/(1-beta)`. The two branches agree in value and derivative at
/// the matching point, and the derivative equals `kappa_beta` composed with
/// the map itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchMap {
    beta: f64,
    matching_point: f64,
    prefactor: f64,
}

impl StretchMap {
    pub fn new(beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) || !beta.is_finite() {
            return Err(GsqgError::InvalidParameter(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        let matching_point = 1.0 / (1.0 - beta);
        let prefactor = (1.0 - beta).powf(1.0 / (1.0 - beta));
        Ok(StretchMap {
            beta,
            matching_point,
            prefactor,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn matching_point(&self) -> f64 {
        self.matching_point
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// lambda_beta(x2), continuous and strictly increasing on [0, inf).
    pub fn lambda(&self, x2: f64) -> Result<f64> {
        if x2 < 0.0 || !x2.is_finite() {
            return Err(GsqgError::Domain(format!(
                "lambda_beta requires x2 >= 0, got {x2}"
            )));
        }
        if x2 >= self.matching_point {
            Ok(x2 - self.beta / (1.0 - self.beta))
        } else {
            Ok(self.prefactor * x2.powf(1.0 / (1.0 - self.beta)))
        }
    }

    /// Inverse of `lambda`; closed form on each branch.
    pub fn lambda_inv(&self, y2: f64) -> Result<f64> {
        if y2 < 0.0 || !y2.is_finite() {
            return Err(GsqgError::Domain(format!(
                "lambda_beta inverse requires y2 >= 0, got {y2}"
            )));
        }
        if y2 >= 1.0 {
            Ok(y2 + self.beta / (1.0 - self.beta))
        } else {
            Ok(y2.powf(1.0 - self.beta) / (1.0 - self.beta))
        }
    }

    /// lambda_beta'(x2) = kappa_beta(lambda_beta(x2)), in closed form.
    pub fn lambda_deriv(&self, x2: f64) -> Result<f64> {
        if x2 < 0.0 || !x2.is_finite() {
            return Err(GsqgError::Domain(format!(
                "lambda_beta' requires x2 >= 0, got {x2}"
            )));
        }
        if x2 >= self.matching_point {
            Ok(1.0)
        } else {
            Ok(((1.0 - self.beta) * x2).powf(self.beta / (1.0 - self.beta)))
        }
    }

    /// Apply the plane map `(x1, x2) -> (x1, lambda(x2))`.
    pub fn apply(&self, p: crate::geom::Vec2) -> Result<crate::geom::Vec2> {
        Ok(crate::geom::Vec2::new(p.x1, self.lambda(p.x2)?))
    }

    /// Apply the inverse plane map.
    pub fn apply_inv(&self, p: crate::geom::Vec2) -> Result<crate::geom::Vec2> {
        Ok(crate::geom::Vec2::new(p.x1, self.lambda_inv(p.x2)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(Params::new(0.25, 0.5).is_ok());
        assert!(Params::new(0.0, 0.5).is_err());
        assert!(Params::new(0.5, 0.5).is_err());
        assert!(Params::new(0.25, 1.0).is_err());
        assert!(Params::new(0.25, -0.1).is_err());
        assert!(Params::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(Params::new(0.25, 0.5).unwrap().classify(), Regime::WellPosed);
        assert_eq!(Params::new(0.1, 0.05).unwrap().classify(), Regime::IllPosedLow);
        // for alpha > 1/4 the well-posed window is empty; 0.5 < 2*0.3
        assert_eq!(Params::new(0.3, 0.5).unwrap().classify(), Regime::IllPosedLow);
        assert_eq!(Params::new(0.2, 0.7).unwrap().classify(), Regime::IllPosedHigh);
    }

    #[test]
    fn well_posed_implies_alpha_at_most_quarter() {
        let mut a = 0.005;
        while a < 0.5 {
            let mut b = 0.0;
            while b < 1.0 {
                if let Ok(p) = Params::new(a, b) {
                    if p.classify() == Regime::WellPosed {
                        assert!(a <= 0.25 + 1e-12, "({a}, {b}) classified well-posed");
                        assert!(b >= 2.0 * a - 1e-12 && b <= 1.0 - 2.0 * a + 1e-12);
                    }
                }
                b += 0.01;
            }
            a += 0.005;
        }
    }

    #[test]
    fn lambda_examples() {
        let id = StretchMap::new(0.0).unwrap();
        assert!((id.lambda(0.7).unwrap() - 0.7).abs() < 1e-15);
        assert!((id.lambda_inv(3.3).unwrap() - 3.3).abs() < 1e-15);

        let m = StretchMap::new(0.5).unwrap();
        assert!((m.lambda(1.0).unwrap() - 0.25).abs() < 1e-15);
        // matching point 2: both branches give 1
        assert!((m.lambda(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.prefactor * (2.0f64).powf(2.0) - 1.0).abs() < 1e-12);
        assert!((m.lambda_inv(0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!(m.lambda(-1.0).is_err());
        assert!(m.lambda_inv(-0.5).is_err());
    }

    #[test]
    fn lambda_inverse_matches_bisection_oracle() {
        // independent oracle: bisect the monotone map for lambda(v) = 0.1
        let m = StretchMap::new(0.25).unwrap();
        let target = 0.1;
        let (mut lo, mut hi) = (0.0f64, m.matching_point());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if m.lambda(mid).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let v = m.lambda_inv(target).unwrap();
        assert!((v - oracle).abs() <= 1e-12 * oracle.max(1.0));
        assert!((m.lambda(v).unwrap() - target).abs() <= 1e-12 * target);
        // frozen from the closed form
        assert!((v - 0.23710392133852).abs() < 1e-12);
    }

    #[test]
    fn lambda_inverse_roundtrip() {
        for &beta in &[0.0, 0.2, 0.5, 0.9] {
            let m = StretchMap::new(beta).unwrap();
            for i in 0..200 {
                let x2 = 0.01 + 0.05 * i as f64;
                let y = m.lambda(x2).unwrap();
                let back = m.lambda_inv(y).unwrap();
                assert!(
                    (back - x2).abs() <= 1e-12 * x2.max(1.0),
                    "beta={beta} x2={x2} back={back}"
                );
            }
        }
    }

    #[test]
    fn kappa_examples() {
        assert!((kappa_beta(0.5, 0.25) - 0.5).abs() < 1e-15);
        assert!((kappa_beta(0.3, 4.0) - 1.0).abs() < 1e-15);
        // kappa(lambda(x2)) has the closed power form below the matching point
        let m = StretchMap::new(0.5).unwrap();
        let v = kappa_beta(0.5, m.lambda(1.0).unwrap());
        let closed = (1.0f64 - 0.5).powf(0.5 / 0.5) * 1.0f64.powf(0.5 / 0.5);
        assert!((v - 0.5).abs() < 1e-15);
        assert!((v - closed).abs() < 1e-15);
    }

    #[test]
    fn lambda_deriv_equals_kappa_of_lambda() {
        // sampled identity lambda' = kappa ∘ lambda against finite differences
        for &beta in &[0.0, 0.25, 0.5, 0.75] {
            let m = StretchMap::new(beta).unwrap();
            let h = 1e-6;
            for i in 0..1000 {
                let x2 = 0.002 + 0.004 * i as f64; // covers both branches
                let fd = (m.lambda(x2 + h).unwrap() - m.lambda(x2 - h).unwrap()) / (2.0 * h);
                let closed = m.lambda_deriv(x2).unwrap();
                let viak = kappa_beta(beta, m.lambda(x2).unwrap());
                assert!(
                    (fd - closed).abs() <= 1e-6 * closed.abs().max(1e-12),
                    "beta={beta} x2={x2} fd={fd} closed={closed}"
                );
                assert!((viak - closed).abs() <= 1e-12 * closed.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn lambda_monotone_and_convex_below_matching() {
        for &beta in &[0.1, 0.4, 0.7] {
            let m = StretchMap::new(beta).unwrap();
            let n = 500;
            let h = m.matching_point() / (n as f64 + 2.0);
            let mut prev = m.lambda(0.0).unwrap();
            assert_eq!(prev, 0.0);
            for i in 1..n {
                let x = i as f64 * h;
                let v = m.lambda(x).unwrap();
                assert!(v > prev, "not increasing at {x}");
                // second difference nonnegative below the matching point
                let d2 = m.lambda(x + h).unwrap() - 2.0 * v + prev;
                assert!(d2 >= -1e-9, "not convex at {x}: {d2}");
                prev = v;
            }
        }
    }
}

//! Model parameters and their coupling constraints.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default `c1` in the smallness ordering `alpha <= c1 * (1 - eta)`.
pub const DEFAULT_SMALLNESS_C1: f64 = 0.2;
/// Default `c2` in the smallness ordering `(1 - eta) <= c2 * beta`.
pub const DEFAULT_SMALLNESS_C2: f64 = 0.5;

/// The parameter tuple `(alpha, beta, eta, lambda, mu, gamma)`.
///
/// `lambda` and `gamma` are derived, never set directly:
/// `lambda = 1 + alpha / (10 beta)` and `gamma = (1 + mu) / (1 - mu) * beta`.
/// The smallness ordering `alpha <= c1 (1 - eta) <= c1 c2 beta` is enforced
/// by [`ModelParams::new`] and skipped by [`ModelParams::new_unchecked`];
/// the hard constraints (positivity, `|mu| < 1`) always hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
    eta: f64,
    lambda: f64,
    mu: f64,
    gamma: f64,
}

impl ModelParams {
    /// Build a parameter set with the smallness ordering check
    /// (`alpha <= c1(1-eta)` and `(1-eta) <= c2*beta` with the default
    /// constants).
    pub fn new(alpha: f64, beta: f64, one_minus_eta: f64, mu: f64) -> Result<Self> {
        let p = Self::new_unchecked(alpha, beta, one_minus_eta, mu)?;
        let c1 = DEFAULT_SMALLNESS_C1;
        let c2 = DEFAULT_SMALLNESS_C2;
        if alpha > c1 * one_minus_eta {
            return Err(Error::Config(format!(
                "smallness ordering violated: alpha = {alpha} > {c1} * (1 - eta) = {}",
                c1 * one_minus_eta
            )));
        }
        if one_minus_eta > c2 * beta {
            return Err(Error::Config(format!(
                "smallness ordering violated: 1 - eta = {one_minus_eta} > {c2} * beta = {}",
                c2 * beta
            )));
        }
        Ok(p)
    }

    /// Build a parameter set skipping the smallness ordering (exploration
    /// mode). Positivity, ranges and the `lambda`/`gamma` couplings are
    /// still enforced.
    pub fn new_unchecked(alpha: f64, beta: f64, one_minus_eta: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain(format!("beta must lie in (0, 1], got {beta}")));
        }
        if !(one_minus_eta > 0.0 && one_minus_eta < 1.0) {
            return Err(Error::Domain(format!(
                "1 - eta must lie in (0, 1), got {one_minus_eta}"
            )));
        }
        if !(mu.abs() < 1.0) {
            return Err(Error::ConstructionInvalid(format!("|mu| must be < 1, got {mu}")));
        }
        let lambda = 1.0 + alpha / (10.0 * beta);
        let gamma = (1.0 + mu) / (1.0 - mu) * beta;
        Ok(ModelParams {
            alpha,
            beta,
            eta: 1.0 - one_minus_eta,
            lambda,
            mu,
            gamma,
        })
    }

    /// Replace `mu`, refreshing `gamma = (1+mu)/(1-mu) * beta`.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        if !(mu.abs() < 1.0) || !mu.is_finite() {
            return Err(Error::ConstructionInvalid(format!("|mu| must be < 1, got {mu}")));
        }
        let mut p = *self;
        p.mu = mu;
        p.gamma = (1.0 + mu) / (1.0 - mu) * self.beta;
        Ok(p)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn one_minus_eta(&self) -> f64 {
        1.0 - self.eta
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn couplings_hold_exactly() {
        let p = ModelParams::new(0.05, 1.0, 0.3, 0.01).unwrap();
        assert_eq!(p.lambda(), 1.0 + 0.05 / 10.0);
        assert_eq!(p.gamma(), 1.01 / 0.99);
        // sign(gamma - beta) = sign(mu)
        assert!(p.gamma() > p.beta());
        let m = p.with_mu(-0.01).unwrap();
        assert!(m.gamma() < m.beta());
    }

    #[test]
    fn ordering_check_rejects_and_unchecked_allows() {
        assert!(ModelParams::new(0.5, 1.0, 0.2, 0.0).is_err());
        assert!(ModelParams::new_unchecked(0.5, 1.0, 0.2, 0.0).is_ok());
        assert!(ModelParams::new(0.04, 1.0, 0.2, 0.0).is_ok());
    }

    #[test]
    fn hard_constraints_always_enforced() {
        assert!(ModelParams::new_unchecked(-0.1, 1.0, 0.2, 0.0).is_err());
        assert!(ModelParams::new_unchecked(0.05, 1.2, 0.2, 0.0).is_err());
        assert!(ModelParams::new_unchecked(0.05, 1.0, 0.2, 1.0).is_err());
    }
}

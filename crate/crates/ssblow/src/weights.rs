//! The radial and angular weight functions defining the function spaces.
//!
//! Radial: `w_z = (1+z^{1/beta})^2 / z^{2/beta}`,
//! `w_z^* = (1+z^{1/beta}) / z^{1/beta+1/4}`,
//! `w_z^{**} = (1+z^{1/beta+1/4}) / z^{1/beta+1/4}`.
//! Angular: `w^K_theta = K^{(1-alpha/(3 beta))/2}`,
//! `w^eta_theta = sin(2 theta)^{-eta/2}`,
//! `w^lambda_theta = sin(2 theta)^{-lambda/2}`.
//! Product kinds pair an angular factor with `w_z` (or `w_z^*`).

use crate::error::{Error, Result};
use crate::grid::{Field, Grids, RadialFn};
use crate::params::ModelParams;
use crate::profiles::k_theta_raw;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    WZ,
    WZStar,
    WZ2Star,
    WKTheta,
    WEtaTheta,
    WLambdaTheta,
    WK,
    WEta,
    WLambda,
    WStarEta,
    WStarLambda,
}

impl FromStr for WeightKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "w_z" => WeightKind::WZ,
            "w_z_star" => WeightKind::WZStar,
            "w_z_2star" => WeightKind::WZ2Star,
            "wK_theta" => WeightKind::WKTheta,
            "wEta_theta" => WeightKind::WEtaTheta,
            "wLambda_theta" => WeightKind::WLambdaTheta,
            "wK" => WeightKind::WK,
            "wEta" => WeightKind::WEta,
            "wLambda" => WeightKind::WLambda,
            "wStarEta" => WeightKind::WStarEta,
            "wStarLambda" => WeightKind::WStarLambda,
            other => return Err(Error::Config(format!("unknown weight kind '{other}'"))),
        })
    }
}

/// `w_z(z)`; equals 4 at z = 1 and tends to 1 at infinity.
pub fn w_z(z: f64, beta: f64) -> f64 {
    let p = z.powf(1.0 / beta);
    let r = (1.0 + p) / p;
    r * r
}

/// `w_z^*(z)`.
pub fn w_z_star(z: f64, beta: f64) -> f64 {
    let p = z.powf(1.0 / beta);
    (1.0 + p) / (p * z.powf(0.25))
}

/// `w_z^{**}(z)`, the large-z-friendly variant used by the velocity
/// integrability diagnostic.
pub fn w_z_2star(z: f64, beta: f64) -> f64 {
    let p = z.powf(1.0 / beta + 0.25);
    (1.0 + p) / p
}

/// `K^{(1 - alpha/(3 beta))/2}`.
pub fn w_k_theta(theta: f64, params: &ModelParams) -> f64 {
    let k = k_theta_raw(theta);
    if k <= 0.0 {
        return 0.0;
    }
    k.powf(0.5 * (1.0 - params.alpha() / (3.0 * params.beta())))
}

/// `sin(2 theta)^{-eta/2}`.
pub fn w_eta_theta(theta: f64, params: &ModelParams) -> f64 {
    (2.0 * theta).sin().powf(-params.eta() / 2.0)
}

/// `sin(2 theta)^{-lambda/2}` (super-singular: lambda > 1).
pub fn w_lambda_theta(theta: f64, params: &ModelParams) -> f64 {
    (2.0 * theta).sin().powf(-params.lambda() / 2.0)
}

/// Pointwise weight value.
pub fn weight_value(kind: WeightKind, z: f64, theta: f64, params: &ModelParams) -> f64 {
    let beta = params.beta();
    match kind {
        WeightKind::WZ => w_z(z, beta),
        WeightKind::WZStar => w_z_star(z, beta),
        WeightKind::WZ2Star => w_z_2star(z, beta),
        WeightKind::WKTheta => w_k_theta(theta, params),
        WeightKind::WEtaTheta => w_eta_theta(theta, params),
        WeightKind::WLambdaTheta => w_lambda_theta(theta, params),
        WeightKind::WK => w_k_theta(theta, params) * w_z(z, beta),
        WeightKind::WEta => w_eta_theta(theta, params) * w_z(z, beta),
        WeightKind::WLambda => w_lambda_theta(theta, params) * w_z(z, beta),
        WeightKind::WStarEta => w_eta_theta(theta, params) * w_z_star(z, beta),
        WeightKind::WStarLambda => w_lambda_theta(theta, params) * w_z_star(z, beta),
    }
}

/// Sample a purely radial weight on the grid.
pub fn weight_radial(kind: WeightKind, grids: &Arc<Grids>, params: &ModelParams) -> Result<RadialFn> {
    match kind {
        WeightKind::WZ | WeightKind::WZStar | WeightKind::WZ2Star => Ok(RadialFn::from_fn(
            grids,
            |z| weight_value(kind, z, 0.5, params),
        )),
        _ => Err(Error::Config(format!("{kind:?} is not a radial weight"))),
    }
}

/// Sample any weight kind as a field (radial kinds broadcast over theta).
pub fn weight_field(kind: WeightKind, grids: &Arc<Grids>, params: &ModelParams) -> Field {
    Field::from_fn(grids, |z, t| weight_value(kind, z, t, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grids, GridConfig};
    use std::f64::consts::PI;

    fn params() -> ModelParams {
        ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap()
    }

    #[test]
    fn reference_values() {
        let p = params();
        assert!((w_z(1.0, p.beta()) - 4.0).abs() < 1e-15);
        assert!((w_eta_theta(PI / 4.0, &p) - 1.0).abs() < 1e-15);
        // w_z -> 1 at large z
        assert!((w_z(1e12, p.beta()) - 1.0).abs() < 1e-10);
        assert!((w_z_2star(1e12, p.beta()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn all_kinds_positive_on_open_domain() {
        let p = params();
        let g = make_grids(GridConfig { n_z: 32, n_theta: 16, ..Default::default() }).unwrap();
        for kind in [
            WeightKind::WZ,
            WeightKind::WZStar,
            WeightKind::WZ2Star,
            WeightKind::WKTheta,
            WeightKind::WEtaTheta,
            WeightKind::WLambdaTheta,
            WeightKind::WK,
            WeightKind::WEta,
            WeightKind::WLambda,
            WeightKind::WStarEta,
            WeightKind::WStarLambda,
        ] {
            let f = weight_field(kind, &g, &p);
            assert!(
                f.values.iter().all(|&v| v > 0.0 && v.is_finite()),
                "{kind:?} not strictly positive"
            );
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(WeightKind::from_str("w_z").unwrap(), WeightKind::WZ);
        assert!(WeightKind::from_str("nope").is_err());
    }
}

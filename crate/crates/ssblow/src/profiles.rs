//! Closed-form fundamental self-similar profiles and their derivatives.
//!
//! The radial factor is `gamma_star(z) = 2 z^{1/gamma} / (gamma (1 + z^{1/gamma})^2)`
//! with exact antiderivative relation `l_inv_gamma_star(z) = 2 / (1 + z^{1/gamma})`,
//! the angular factor is `gamma_theta = K(theta)^{alpha/(3 gamma)}` with
//! `K = sin(theta) cos^2(theta)`, and the full profile is
//! `f_star = (2 alpha / 3) * gamma_theta / c_star * gamma_star`.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::Panel;
use crate::report::Report;
use serde_json::json;
use std::f64::consts::PI;

/// `K(theta) = sin(theta) cos^2(theta)` on `[0, pi/2]`.
pub fn k_theta(theta: f64) -> Result<f64> {
    if !(0.0..=PI / 2.0).contains(&theta) {
        return Err(Error::Domain(format!(
            "theta = {theta} outside [0, pi/2]"
        )));
    }
    Ok(theta.sin() * theta.cos() * theta.cos())
}

/// Unchecked `K(theta)` for hot loops on grid nodes already validated.
#[inline]
pub fn k_theta_raw(theta: f64) -> f64 {
    theta.sin() * theta.cos() * theta.cos()
}

/// Radial profile `2 z^{1/gamma} / (gamma (1 + z^{1/gamma})^2)`.
pub fn gamma_star(z: f64, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if z < 0.0 {
        return Err(Error::Domain(format!("z must be nonnegative, got {z}")));
    }
    Ok(gamma_star_raw(z, gamma))
}

#[inline]
pub fn gamma_star_raw(z: f64, gamma: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let p = z.powf(1.0 / gamma);
    if p.is_infinite() {
        return 0.0;
    }
    2.0 * p / (gamma * (1.0 + p) * (1.0 + p))
}

/// Closed form of the inward integral of the radial profile:
/// `2 / (1 + z^{1/gamma})`, monotone from 2 at the origin to 0.
pub fn l_inv_gamma_star(z: f64, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if z < 0.0 {
        return Err(Error::Domain(format!("z must be nonnegative, got {z}")));
    }
    Ok(l_inv_gamma_star_raw(z, gamma))
}

#[inline]
pub fn l_inv_gamma_star_raw(z: f64, gamma: f64) -> f64 {
    2.0 / (1.0 + z.powf(1.0 / gamma))
}

/// Angular profile `K(theta)^{alpha/(3 gamma)}` on the open interval.
pub fn gamma_theta(theta: f64, gamma: f64, alpha: f64) -> f64 {
    let k = k_theta_raw(theta);
    if k <= 0.0 {
        return 0.0;
    }
    k.powf(alpha / (3.0 * gamma))
}

/// Endpoint-refined composite Gauss-Legendre quadrature of a function on
/// `[0, pi/2]` (the integrands here are at worst mildly degenerate at the
/// endpoints).
fn angular_quadrature(f: impl Fn(f64) -> f64, nodes_per_panel: usize) -> f64 {
    let levels = 8;
    let ratio: f64 = 0.25;
    let quarter = PI / 4.0;
    let mut edges: Vec<f64> = (0..=levels).map(|j| quarter * ratio.powi(j)).collect();
    edges.push(0.0);
    edges.reverse();
    let mut total = 0.0;
    for w in edges.windows(2) {
        for (half, side) in [(w[0], w[1]), (PI / 2.0 - w[1], PI / 2.0 - w[0])] {
            let p = Panel::new(half, side, nodes_per_panel);
            total += p
                .nodes
                .iter()
                .zip(&p.weights)
                .map(|(&t, &wt)| f(t) * wt)
                .sum::<f64>();
        }
    }
    total
}

/// Normalization `c_star = int_0^{pi/2} K(theta)^{1 + alpha/(3 gamma)} dtheta`,
/// always in `(0, 1/3]`. Convergence is checked across a refinement; failure
/// to converge is reported as a numeric-accuracy error.
pub fn c_star(gamma: f64, alpha: f64) -> Result<f64> {
    if gamma <= 0.0 || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "c_star needs positive parameters, got gamma = {gamma}, alpha = {alpha}"
        )));
    }
    let b = alpha / (3.0 * gamma);
    let integrand = |t: f64| {
        let k = k_theta_raw(t);
        if k <= 0.0 {
            0.0
        } else {
            k.powf(1.0 + b)
        }
    };
    let coarse = angular_quadrature(integrand, 16);
    let fine = angular_quadrature(integrand, 24);
    if (coarse - fine).abs() > 1e-11 * fine.abs().max(1e-3) {
        return Err(Error::NumericAccuracy(format!(
            "c_star quadrature did not converge: {coarse} vs {fine}"
        )));
    }
    Ok(fine)
}

/// The fundamental profile with its normalization precomputed.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalProfile {
    pub gamma: f64,
    pub alpha: f64,
    pub c_star: f64,
}

impl FundamentalProfile {
    pub fn new(gamma: f64, alpha: f64) -> Result<Self> {
        Ok(FundamentalProfile {
            gamma,
            alpha,
            c_star: c_star(gamma, alpha)?,
        })
    }

    pub fn for_params(params: &ModelParams) -> Result<Self> {
        Self::new(params.gamma(), params.alpha())
    }

    /// Full profile value `(2 alpha / 3) gamma_theta / c_star * gamma_star`.
    pub fn eval(&self, z: f64, theta: f64) -> f64 {
        self.radial(z) * self.angular(theta)
    }

    /// Radial factor including the `2 alpha / 3` scale.
    pub fn radial(&self, z: f64) -> f64 {
        2.0 * self.alpha / 3.0 * gamma_star_raw(z, self.gamma)
    }

    /// Angular factor `gamma_theta / c_star`.
    pub fn angular(&self, theta: f64) -> f64 {
        gamma_theta(theta, self.gamma, self.alpha) / self.c_star
    }

    /// `<F*, K>_theta (z) = (2 alpha / 3) gamma_star(z)` by the definition
    /// of the normalization.
    pub fn bracket_k(&self, z: f64) -> f64 {
        2.0 * self.alpha / 3.0 * gamma_star_raw(z, self.gamma)
    }

    /// Closed form of `(3 / 2 alpha) L^{-1}_{z,K}(F*)`, which equals
    /// `l_inv_gamma_star`.
    pub fn l_inv_scaled(&self, z: f64) -> f64 {
        l_inv_gamma_star_raw(z, self.gamma)
    }
}

/// Full profile; prefer [`FundamentalProfile`] when evaluating many points.
pub fn f_star(z: f64, theta: f64, params: &ModelParams) -> Result<f64> {
    Ok(FundamentalProfile::for_params(params)?.eval(z, theta))
}

/// Closed-form `D_z^k` of the radial profile, `k` in 1..=4, via the
/// recursion in `(gamma_star, l_inv_gamma_star)`.
pub fn dz_gamma_star(z: f64, gamma: f64, order: usize) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::UnsupportedOrder { order, max: 4 });
    }
    if gamma <= 0.0 {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let g = gamma_star_raw(z, gamma);
    let am1 = l_inv_gamma_star_raw(z, gamma) - 1.0;
    let ig = 1.0 / gamma;
    Ok(match order {
        1 => ig * g * am1,
        2 => ig * ig * g * am1 * am1 - ig * g * g,
        3 => ig.powi(3) * g * am1.powi(3) - 4.0 * ig * ig * g * g * am1,
        4 => {
            ig.powi(4) * g * am1.powi(4) - 11.0 * ig.powi(3) * g * g * am1 * am1
                + 4.0 * ig * ig * g.powi(3)
        }
        _ => unreachable!(),
    })
}

/// Closed-form `D_theta^k` of the angular profile, `k` in 1..=4.
///
/// With `b = alpha/(3 gamma)`, `u = cos(2 theta)`, `v = sin(2 theta)` and
/// `c2 = cos(2 theta) - sin^2(theta)`, repeated application of
/// `D_theta gamma_theta = 2 b gamma_theta c2`, `D_theta c2 = -3 v^2`,
/// `D_theta u = -2 v^2`, `D_theta (v^2) = 4 u v^2` gives the four orders.
pub fn dtheta_gamma_theta(theta: f64, gamma: f64, alpha: f64, order: usize) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::UnsupportedOrder { order, max: 4 });
    }
    let gt = gamma_theta(theta, gamma, alpha);
    let b = alpha / (3.0 * gamma);
    let u = (2.0 * theta).cos();
    let v = (2.0 * theta).sin();
    let s2 = theta.sin() * theta.sin();
    let c2 = u - s2;
    let v2 = v * v;
    Ok(match order {
        1 => gt * 2.0 * b * c2,
        2 => gt * (4.0 * b * b * c2 * c2 - 6.0 * b * v2),
        3 => gt * (8.0 * b.powi(3) * c2.powi(3) - 36.0 * b * b * c2 * v2 - 24.0 * b * u * v2),
        4 => {
            gt * (16.0 * b.powi(4) * c2.powi(4) - 144.0 * b.powi(3) * c2 * c2 * v2
                - 192.0 * b * b * u * c2 * v2
                + 108.0 * b * b * v2 * v2
                - 96.0 * b * u * u * v2
                + 48.0 * b * v2 * v2)
        }
        _ => unreachable!(),
    })
}

/// Pointwise residual of the fundamental equation in closed forms:
/// `gamma_star + gamma D_z gamma_star - l_inv_gamma_star * gamma_star`.
pub fn fundamental_ode_residual(z: f64, gamma: f64) -> Result<f64> {
    let g = gamma_star(z, gamma)?;
    let dz = dz_gamma_star(z, gamma, 1)?;
    let a = l_inv_gamma_star_raw(z, gamma);
    Ok(g + gamma * dz - a * g)
}

/// Sup over `[0, 1]` of `|z^{1/g1} - z^{1/g2}|`; the interior critical point
/// is known in closed form.
fn sup_power_gap(g1: f64, g2: f64) -> f64 {
    let (a, b) = {
        let (x, y) = (1.0 / g1, 1.0 / g2);
        (x.min(y), x.max(y))
    };
    if a == b {
        return 0.0;
    }
    let zc = (a / b).powf(1.0 / (b - a));
    (zc.powf(a) - zc.powf(b)).abs()
}

/// Parameter-stability check: under the precondition
/// `|1/g1 - 1/g2| <= min(ln(1-d0)/(2 ln d0), d0)` verifies
/// `sup_{[0,1]} |z^{1/g1} - z^{1/g2}| <= d0` and
/// `sup_z |l_inv_gamma_star_{g1} - l_inv_gamma_star_{g2}| <= 2 d0`.
/// A violated precondition is an error, not a failed report.
pub fn parameter_stability(
    gamma1: f64,
    gamma2: f64,
    delta0: f64,
    n_grid: usize,
) -> Result<Report> {
    if !(gamma1 > 0.0 && gamma1 < 2.0 && gamma2 > 0.0 && gamma2 < 2.0) {
        return Err(Error::Precondition(format!(
            "gamma1, gamma2 must lie in (0, 2): got {gamma1}, {gamma2}"
        )));
    }
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::Precondition(format!("delta0 must lie in (0,1): got {delta0}")));
    }
    let gap = (1.0 / gamma1 - 1.0 / gamma2).abs();
    let bound = ((1.0 - delta0).ln() / (2.0 * delta0.ln())).min(delta0);
    if gap > bound {
        return Err(Error::Precondition(format!(
            "|1/g1 - 1/g2| = {gap} exceeds min(ln(1-d0)/(2 ln d0), d0) = {bound}"
        )));
    }

    // sup over [0,1] of the power gap: closed-form critical point plus a
    // dense-grid sweep as a guard.
    let mut sup_pow = sup_power_gap(gamma1, gamma2);
    for i in 0..=n_grid {
        let z = i as f64 / n_grid as f64;
        let d = (z.powf(1.0 / gamma1) - z.powf(1.0 / gamma2)).abs();
        sup_pow = sup_pow.max(d);
    }

    // sup over [0, inf) of the l_inv gap: sample densely in ln z far past
    // the transition region; the gap vanishes at both ends.
    let mut sup_linv: f64 = 0.0;
    for i in 0..=n_grid {
        let x = -30.0 + 60.0 * i as f64 / n_grid as f64;
        let z = x.exp();
        let d = (l_inv_gamma_star_raw(z, gamma1) - l_inv_gamma_star_raw(z, gamma2)).abs();
        sup_linv = sup_linv.max(d);
    }

    let passed = sup_pow <= delta0 && sup_linv <= 2.0 * delta0;
    Ok(Report {
        name: "parameter_stability".into(),
        measured: sup_linv,
        reference: 2.0 * delta0,
        tolerance: 0.0,
        relative: false,
        passed,
        context: json!({
            "gamma1": gamma1,
            "gamma2": gamma2,
            "delta0": delta0,
            "sup_power_gap": sup_pow,
            "power_gap_bound": delta0,
            "precondition_gap": gap,
            "precondition_bound": bound,
        }),
    })
}

/// Empirical constant in the profile-stability bound
/// `(3/2 alpha) sup |F*_{g1} - F*_{g2}| <= C delta0 / gamma1`:
/// returns the measured ratio `C`.
pub fn f_star_stability_ratio(gamma1: f64, gamma2: f64, delta0: f64, alpha: f64) -> Result<f64> {
    let p1 = FundamentalProfile::new(gamma1, alpha)?;
    let p2 = FundamentalProfile::new(gamma2, alpha)?;
    let mut sup: f64 = 0.0;
    let n = 600;
    for i in 0..=n {
        let z = (-24.0 + 48.0 * i as f64 / n as f64).exp();
        for j in 1..n {
            let t = PI / 2.0 * j as f64 / n as f64;
            sup = sup.max((p1.eval(z, t) - p2.eval(z, t)).abs());
        }
    }
    Ok(1.5 / alpha * sup / (delta0 / gamma1))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2_OVER_4: f64 = std::f64::consts::SQRT_2 / 4.0;

    #[test]
    fn k_theta_endpoint_and_midpoint_values() {
        assert_eq!(k_theta(0.0).unwrap(), 0.0);
        assert!(k_theta(PI / 2.0).unwrap().abs() < 1e-16);
        assert!((k_theta(PI / 4.0).unwrap() - SQRT2_OVER_4).abs() < 1e-15);
        assert!(k_theta(-0.1).is_err());
        assert!(k_theta(2.0).is_err());
    }

    #[test]
    fn gamma_star_reference_values() {
        assert_eq!(gamma_star(0.0, 1.0).unwrap(), 0.0);
        for g in [0.5, 1.0, 1.7] {
            assert!((gamma_star(1.0, g).unwrap() - 0.5 / g).abs() < 1e-15);
        }
        assert!((gamma_star(3.0, 1.0).unwrap() - 3.0 / 8.0).abs() < 1e-15);
        assert!(gamma_star(1.0, 0.0).is_err());
        assert!(gamma_star(-1.0, 1.0).is_err());
    }

    #[test]
    fn l_inv_endpoints() {
        assert_eq!(l_inv_gamma_star(0.0, 0.7).unwrap(), 2.0);
        assert_eq!(l_inv_gamma_star(1.0, 0.7).unwrap(), 1.0);
        assert!(l_inv_gamma_star(1e300, 0.7).unwrap() < 1e-100);
    }

    #[test]
    fn analytic_antiderivative_identity() {
        // D_z l_inv = -gamma_star, both in closed form.
        for &g in &[0.5, 1.0, 1.5] {
            for i in 0..100 {
                let z = (-12.0 + 24.0 * i as f64 / 99.0_f64).exp();
                let p = z.powf(1.0 / g);
                // d/dlnz of 2/(1+p) = -2 p' z /(1+p)^2 with z dp/dz = p/g
                let dz_l = -2.0 * p / (g * (1.0 + p) * (1.0 + p));
                assert!((dz_l + gamma_star_raw(z, g)).abs() < 1e-16 * (1.0 + dz_l.abs()));
            }
        }
    }

    #[test]
    fn fundamental_ode_residual_is_zero_in_closed_form() {
        for &g in &[0.5, 1.0, 1.5] {
            let mut max_res: f64 = 0.0;
            for i in 0..200 {
                let z = (-14.0 + 28.0 * i as f64 / 199.0_f64).exp();
                max_res = max_res.max(fundamental_ode_residual(z, g).unwrap().abs());
            }
            assert!(max_res < 1e-13, "gamma = {g}: residual {max_res}");
        }
    }

    #[test]
    fn c_star_limits_and_bounds() {
        // alpha/(3 gamma) -> 0 gives int K = 1/3.
        let c = c_star(1.0, 1e-12).unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-10);
        // exponent equal to 1: int K^2 = pi/32 (Beta-function identity).
        let c = c_star(1.0, 3.0).unwrap();
        assert!((c - PI / 32.0).abs() < 1e-12);
        // always within (0, 1/3]
        for &(g, a) in &[(0.5, 0.05), (1.0, 0.1), (1.5, 0.01)] {
            let c = c_star(g, a).unwrap();
            assert!(c > 0.0 && c <= 1.0 / 3.0 + 1e-15);
        }
    }

    #[test]
    fn dz_gamma_star_matches_log_grid_finite_differences() {
        let g = 0.8;
        let h = 1e-3;
        for order in 1..=4usize {
            let mut max_rel: f64 = 0.0;
            for i in 0..40 {
                let x = -3.0 + 6.0 * i as f64 / 39.0;
                // central differences in x = ln z of the (order-1)-th closed form
                let lower = |x: f64| {
                    let z = x.exp();
                    if order == 1 {
                        gamma_star_raw(z, g)
                    } else {
                        dz_gamma_star(z, g, order - 1).unwrap()
                    }
                };
                let fd = (lower(x + h) - lower(x - h)) / (2.0 * h);
                let exact = dz_gamma_star(x.exp(), g, order).unwrap();
                let rel = (fd - exact).abs() / exact.abs().max(1e-8);
                max_rel = max_rel.max(rel);
            }
            assert!(max_rel < 1e-4, "order {order}: rel err {max_rel}");
        }
        assert!(dz_gamma_star(1.0, 1.0, 5).is_err());
        assert!(dz_gamma_star(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn dz_gamma_star_vanishes_at_unity() {
        // l_inv(1) = 1 kills the first-order factor.
        assert!(dz_gamma_star(1.0, 0.6, 1).unwrap().abs() < 1e-16);
    }

    #[test]
    fn dtheta_gamma_theta_matches_finite_differences() {
        let (g, a) = (0.9, 0.07);
        let h = 1e-4;
        for order in 1..=4usize {
            let mut max_rel: f64 = 0.0;
            for i in 1..60 {
                let t = PI / 2.0 * i as f64 / 60.0;
                let lower = |t: f64| {
                    if order == 1 {
                        gamma_theta(t, g, a)
                    } else {
                        dtheta_gamma_theta(t, g, a, order - 1).unwrap()
                    }
                };
                // D_theta = sin(2t) d/dt
                let fd = (2.0 * t).sin() * (lower(t + h) - lower(t - h)) / (2.0 * h);
                let exact = dtheta_gamma_theta(t, g, a, order).unwrap();
                let rel = (fd - exact).abs() / exact.abs().max(1e-6);
                max_rel = max_rel.max(rel);
            }
            assert!(max_rel < 2e-5, "order {order}: rel err {max_rel}");
        }
    }

    #[test]
    fn dtheta_first_order_reference_points() {
        let (g, a) = (1.0, 0.06);
        let b = a / (3.0 * g);
        // at pi/4: cos(pi/2) - sin^2(pi/4) = -1/2
        let expect = gamma_theta(PI / 4.0, g, a) * 2.0 * b * (-0.5);
        assert!((dtheta_gamma_theta(PI / 4.0, g, a, 1).unwrap() - expect).abs() < 1e-15);
        // zero of cos(2t) = sin^2(t): cos2t - (1-cos2t)/2 = 0 -> cos2t = 1/3
        let t0 = 0.5 * (1.0f64 / 3.0).acos();
        assert!(dtheta_gamma_theta(t0, g, a, 1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn f_star_is_separable_and_vanishes_on_boundary() {
        let p = ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap();
        assert_eq!(f_star(0.0, 0.7, &p).unwrap(), 0.0);
        assert_eq!(f_star(2.0, 0.0, &p).unwrap(), 0.0);
        // cross-ratio test for separability
        let f = |z, t| f_star(z, t, &p).unwrap();
        let (z1, z2, t1, t2) = (0.3, 4.0, 0.4, 1.1);
        let lhs = f(z1, t1) * f(z2, t2);
        let rhs = f(z1, t2) * f(z2, t1);
        assert!((lhs - rhs).abs() < 1e-15 * lhs.abs());
    }

    #[test]
    fn f_star_midpoint_value() {
        let p = ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap();
        let prof = FundamentalProfile::for_params(&p).unwrap();
        let expect = p.alpha() / (3.0 * p.gamma()) * gamma_theta(PI / 4.0, p.gamma(), p.alpha())
            / prof.c_star;
        assert!((prof.eval(1.0, PI / 4.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn parameter_stability_identical_profiles() {
        let r = parameter_stability(1.0, 1.0, 0.3, 400).unwrap();
        assert!(r.passed);
        assert_eq!(r.measured, 0.0);
    }

    #[test]
    fn parameter_stability_at_precondition_boundary() {
        let delta0: f64 = 0.3;
        let bound = ((1.0 - delta0).ln() / (2.0 * delta0.ln())).min(delta0);
        // construct gamma2 from gamma1 = 1 at the boundary
        let gamma1: f64 = 1.0;
        let gamma2 = 1.0 / (1.0 / gamma1 + bound);
        let r = parameter_stability(gamma1, gamma2, delta0, 800).unwrap();
        assert!(r.passed, "sup = {} vs 2 delta0 = {}", r.measured, r.reference);
        let sup_pow = r.context["sup_power_gap"].as_f64().unwrap();
        assert!(sup_pow <= delta0 + 1e-12);
    }

    #[test]
    fn parameter_stability_rejects_precondition_violation() {
        assert!(matches!(
            parameter_stability(1.0, 0.2, 0.1, 100),
            Err(Error::Precondition(_))
        ));
    }
}

//! Velocity functionals `U`, `V`, the stretching term, the transport term,
//! the linear operators of the perturbation system, the remainders
//! `R0, R1, R2`, and the scalar `mu` update.

use crate::elliptic::PotentialSolution;
use crate::error::{Error, Result};
use crate::grid::{d_theta, d_z, d_z_radial, partial_theta, Field, Grids, RadialFn};
use crate::params::ModelParams;
use crate::profiles::{l_inv_gamma_star_raw, FundamentalProfile};
use crate::spaces::{bracket_k, l_inv_zk, l_inv_zk_with_zero};
use std::sync::Arc;

/// `U(Phi) = -3 Phi - alpha D_z Phi` (grid operators).
pub fn u_of(phi: &Field, alpha: f64) -> Field {
    let dz = d_z(phi);
    phi.zip_map(&dz, |p, d| -3.0 * p - alpha * d)
}

/// `V(Phi) = partial_theta Phi - tan(theta) Phi` (grid operators).
pub fn v_of(phi: &Field) -> Field {
    let dt = partial_theta(phi);
    let tans: Vec<f64> = phi.grids.angular.nodes.iter().map(|t| t.tan()).collect();
    dt.sub(&phi.mul_angular(&tans))
}

/// Stretching term `R(Phi) = V(Phi) - tan(theta) U(Phi)`.
pub fn stretching(phi: &Field, alpha: f64) -> Field {
    let u = u_of(phi, alpha);
    let v = v_of(phi);
    let tans: Vec<f64> = phi.grids.angular.nodes.iter().map(|t| t.tan()).collect();
    v.sub(&u.mul_angular(&tans))
}

/// Chebyshev-U table: `u[k][j] = U_k(cos 2 theta_j)` for k = 0..n-1, so that
/// `sin(2 k theta) / sin(2 theta) = u[k-1]`.
pub fn chebyshev_u_table(grids: &Arc<Grids>, n: usize) -> Vec<Vec<f64>> {
    let cos2: Vec<f64> = grids.angular.nodes.iter().map(|t| (2.0 * t).cos()).collect();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let row: Vec<f64> = match k {
            0 => cos2.iter().map(|_| 1.0).collect(),
            1 => cos2.iter().map(|c| 2.0 * c).collect(),
            _ => cos2
                .iter()
                .enumerate()
                .map(|(j, c)| 2.0 * c * table[k - 1][j] - table[k - 2][j])
                .collect(),
        };
        table.push(row);
    }
    table
}

/// The velocity ingredients of the transport term, assembled mode-by-mode
/// from the potential decomposition so that `U(Phi)/sin(2 theta)` never
/// forms a 0/0 at the angular endpoints:
/// `sin(2k theta)/sin(2 theta)` is replaced by its Chebyshev polynomial.
pub struct TransportVelocity {
    /// `U(Phi) / sin(2 theta)`.
    pub u_over_sin: Field,
    /// `V(Phi)`.
    pub v: Field,
}

impl TransportVelocity {
    pub fn from_potential(sol: &PotentialSolution, alpha: f64) -> Self {
        let grids = &sol.phi.grids;
        let n_modes = sol.tilde_modes.len();
        let ucheb = chebyshev_u_table(grids, n_modes);
        let cos2: Vec<f64> = grids.angular.nodes.iter().map(|t| (2.0 * t).cos()).collect();
        let sin_sq: Vec<f64> = grids.angular.nodes.iter().map(|t| t.sin() * t.sin()).collect();
        let n_z = grids.radial.len();
        let n_t = grids.angular.len();

        // radial part: Phi_r = G(z) sin(2 theta), G = G* + G~
        let g_total = sol.g_total();
        let dz_g = d_z_radial(&g_total);
        let mut u_over_sin = Field::zeros(grids);
        let mut v = Field::zeros(grids);
        for i in 0..n_z {
            let gu = -3.0 * g_total.values[i] - alpha * dz_g.values[i];
            let gv = g_total.values[i];
            for j in 0..n_t {
                u_over_sin.values[[i, j]] = gu;
                // V(G sin 2theta) = 2 G (cos 2theta - sin^2 theta)
                v.values[[i, j]] = 2.0 * gv * (cos2[j] - sin_sq[j]);
            }
        }
        // tilde part, mode by mode
        for (k1, phi_k) in sol.tilde_modes.iter().enumerate() {
            let k = k1 + 1;
            let dz_k = crate::grid::derivative_uniform(
                phi_k.as_slice().unwrap(),
                grids.radial.h,
                1,
            );
            let cosk: Vec<f64> = grids
                .angular
                .nodes
                .iter()
                .map(|&t| (2.0 * k as f64 * t).cos())
                .collect();
            for i in 0..n_z {
                let pk = phi_k[i];
                if pk == 0.0 && dz_k[i] == 0.0 {
                    continue;
                }
                let uk = -3.0 * pk - alpha * dz_k[i];
                for j in 0..n_t {
                    u_over_sin.values[[i, j]] += uk * ucheb[k - 1][j];
                    // V(phi_k sin 2k theta) =
                    //   phi_k (2k cos 2k theta - 2 sin^2 theta U_{k-1})
                    v.values[[i, j]] +=
                        pk * (2.0 * k as f64 * cosk[j] - 2.0 * sin_sq[j] * ucheb[k - 1][j]);
                }
            }
        }
        TransportVelocity { u_over_sin, v }
    }
}

/// `T_f = (U/sin 2theta) D_theta f + alpha V D_z f` from precomputed
/// velocity ingredients and derivative fields of `f`.
pub fn transport_raw(
    vel: &TransportVelocity,
    d_theta_f: &Field,
    d_z_f: &Field,
    alpha: f64,
) -> Field {
    let out = vel.u_over_sin.mul(d_theta_f);
    out.add(&vel.v.mul(d_z_f).scale(alpha))
}

/// Transport term of `f` advected by the potential's velocity.
pub fn transport(sol: &PotentialSolution, f: &Field, alpha: f64) -> Field {
    let vel = TransportVelocity::from_potential(sol, alpha);
    transport_raw(&vel, &d_theta(f), &d_z(f), alpha)
}

/// Pointwise residual of the incompressibility identity in the
/// logarithmically rescaled form
/// `(cos theta)^{-1} partial_theta(cos theta U) + alpha D_z V + 3 V`,
/// which avoids the unrepresentable `z^{3/alpha}` factors.
pub fn divergence_identity_residual(phi: &Field, alpha: f64) -> Field {
    let u = u_of(phi, alpha);
    let v = v_of(phi);
    let coss: Vec<f64> = phi.grids.angular.nodes.iter().map(|t| t.cos()).collect();
    let inv_cos: Vec<f64> = coss.iter().map(|c| 1.0 / c).collect();
    let term1 = partial_theta(&u.mul_angular(&coss)).mul_angular(&inv_cos);
    let term2 = d_z(&v).scale(alpha);
    term1.add(&term2).add(&v.scale(3.0))
}

/// Core linear operator `L^beta(g) = g + beta D_z g - l_inv_gamma_star_beta g`
/// (the damping factor is the closed form).
pub fn core_op(g: &Field, params: &ModelParams) -> Field {
    let beta = params.beta();
    let damp = RadialFn::from_fn(&g.grids, |z| l_inv_gamma_star_raw(z, beta));
    let dz = d_z(g);
    g.add(&dz.scale(beta)).sub(&g.mul_radial(&damp))
}

/// Main operator `L^beta_Gamma(g) = L^beta(g) - (3/2 alpha) L^{-1}_{z,K}(g) F*_beta`.
pub fn main_op(g: &Field, params: &ModelParams) -> Result<Field> {
    let alpha = params.alpha();
    let prof = FundamentalProfile::new(params.beta(), alpha)?;
    let fsb = Field::from_fn(&g.grids, |z, t| prof.eval(z, t));
    let lzk = l_inv_zk(g)?;
    Ok(core_op(g, params).sub(&fsb.mul_radial(&lzk).scale(1.5 / alpha)))
}

/// Full linear operator
/// `L_Gamma(g) = g + beta D_z g - (3/2a) L^{-1}_{z,K}(F*_gamma) g
///  - (3/2a) L^{-1}_{z,K}(g) F*_gamma`; the first nonlocal factor collapses
/// to `l_inv_gamma_star` in closed form.
pub fn linear_op(g: &Field, params: &ModelParams) -> Result<Field> {
    let alpha = params.alpha();
    let gamma = params.gamma();
    let beta = params.beta();
    let prof = FundamentalProfile::new(gamma, alpha)?;
    let fsg = Field::from_fn(&g.grids, |z, t| prof.eval(z, t));
    let damp = RadialFn::from_fn(&g.grids, |z| l_inv_gamma_star_raw(z, gamma));
    let lzk = l_inv_zk(g)?;
    let dz = d_z(g);
    Ok(g
        .add(&dz.scale(beta))
        .sub(&g.mul_radial(&damp))
        .sub(&fsg.mul_radial(&lzk).scale(1.5 / alpha)))
}

/// `R0` in closed form, valid under the coupling `gamma = (1+mu)/(1-mu) beta`:
/// `R0 = -2 mu z^{1/gamma} / (1 + z^{1/gamma}) F*_gamma`.
pub fn remainder_r0(grids: &Arc<Grids>, params: &ModelParams) -> Result<Field> {
    let expect = (1.0 + params.mu()) / (1.0 - params.mu()) * params.beta();
    if (params.gamma() - expect).abs() > 1e-14 * expect.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "R0 closed form needs gamma = (1+mu)/(1-mu) beta; got gamma = {}, expected {expect}",
            params.gamma()
        )));
    }
    let prof = FundamentalProfile::for_params(params)?;
    let gamma = params.gamma();
    let mu = params.mu();
    Ok(Field::from_fn(grids, |z, t| {
        let p = z.powf(1.0 / gamma);
        let frac = if p.is_infinite() { 1.0 } else { p / (1.0 + p) };
        -2.0 * mu * frac * prof.eval(z, t)
    }))
}

/// Definitional form `R0 = -mu F* + (gamma - (1+mu) beta) D_z F*`,
/// using the closed-form radial derivative; equals [`remainder_r0`].
pub fn remainder_r0_definitional(grids: &Arc<Grids>, params: &ModelParams) -> Result<Field> {
    let prof = FundamentalProfile::for_params(params)?;
    let gamma = params.gamma();
    let mu = params.mu();
    let coeff = gamma - (1.0 + mu) * params.beta();
    let scale = 2.0 * params.alpha() / 3.0;
    Ok(Field::from_fn(grids, |z, t| {
        let ang = prof.angular(t);
        let f = prof.radial(z) * ang;
        let dzf = scale * crate::profiles::dz_gamma_star(z, gamma, 1).unwrap() * ang;
        -mu * f + coeff * dzf
    }))
}

/// `R1 = -mu g - mu beta D_z g`.
pub fn remainder_r1(g: &Field, params: &ModelParams) -> Field {
    let mu = params.mu();
    let dz = d_z(g);
    g.scale(-mu).sub(&dz.scale(mu * params.beta()))
}

/// `R(Phi - Phi_main)` assembled analytically from the decomposition:
/// `R(h sin 2theta) = 2h + 2 alpha sin^2(theta) D_z h` for the `G~` part
/// and the mode expansion for `Phi~`.
pub fn stretching_of_correction(sol: &PotentialSolution, alpha: f64) -> Field {
    let grids = &sol.phi.grids;
    let sin_sq: Vec<f64> = grids.angular.nodes.iter().map(|t| t.sin() * t.sin()).collect();
    let n_z = grids.radial.len();
    let n_t = grids.angular.len();
    let mut out = Field::zeros(grids);

    // G~ sin(2 theta) part
    let dz_gt = d_z_radial(&sol.g_tilde);
    for i in 0..n_z {
        let h = sol.g_tilde.values[i];
        let dh = dz_gt.values[i];
        for j in 0..n_t {
            out.values[[i, j]] = 2.0 * h + 2.0 * alpha * sin_sq[j] * dh;
        }
    }
    // Phi~ part: R(phi_k sin 2k theta) =
    //   2k phi_k cos(2k theta) + 2 sin^2 theta U_{k-1} (2 phi_k + alpha D_z phi_k)
    let n_modes = sol.tilde_modes.len();
    let ucheb = chebyshev_u_table(grids, n_modes);
    for (k1, phi_k) in sol.tilde_modes.iter().enumerate() {
        let k = k1 + 1;
        let dz_k =
            crate::grid::derivative_uniform(phi_k.as_slice().unwrap(), grids.radial.h, 1);
        let cosk: Vec<f64> = grids
            .angular
            .nodes
            .iter()
            .map(|&t| (2.0 * k as f64 * t).cos())
            .collect();
        for i in 0..n_z {
            let pk = phi_k[i];
            if pk == 0.0 && dz_k[i] == 0.0 {
                continue;
            }
            for j in 0..n_t {
                out.values[[i, j]] += 2.0 * k as f64 * pk * cosk[j]
                    + 2.0 * sin_sq[j] * ucheb[k - 1][j] * (2.0 * pk + alpha * dz_k[i]);
            }
        }
    }
    out
}

/// State of the perturbation system at one relaxation step.
pub struct SystemState {
    pub params: ModelParams,
    pub g: Field,
    /// `F = F*_gamma + g`.
    pub f: Field,
    pub potential: PotentialSolution,
}

impl SystemState {
    pub fn new(params: ModelParams, g: Field, potential: PotentialSolution) -> Result<Self> {
        let prof = FundamentalProfile::for_params(&params)?;
        let fs = Field::from_fn(&g.grids, |z, t| prof.eval(z, t));
        let f = fs.add(&g);
        Ok(SystemState {
            params,
            g,
            f,
            potential,
        })
    }
}

/// Nonlinear remainder
/// `R2 = (3/2a) L^{-1}_{z,K}(g) g - (3/2) sin^2(theta) <F,K>_theta F
///  + R(Phi - Phi_main) F`.
pub fn remainder_r2(state: &SystemState) -> Result<Field> {
    let alpha = state.params.alpha();
    let grids = &state.g.grids;
    let lzk_g = l_inv_zk(&state.g)?;
    let term1 = state.g.mul_radial(&lzk_g).scale(1.5 / alpha);
    let bk = bracket_k(&state.f);
    let sin_sq: Vec<f64> = grids.angular.nodes.iter().map(|t| t.sin() * t.sin()).collect();
    let term2 = state.f.mul_radial(&bk).mul_angular(&sin_sq).scale(1.5);
    let term3 = stretching_of_correction(&state.potential, alpha).mul(&state.f);
    Ok(term1.sub(&term2).add(&term3))
}

/// The scalar update `mu = (3/(4 alpha)) L^{-1}_{z,K}(R2 - T)(0)`.
/// `|mu| >= 1` means the construction left its valid regime.
pub fn mu_update(state: &SystemState) -> Result<f64> {
    let alpha = state.params.alpha();
    let t = transport(&state.potential, &state.f, alpha);
    let r2 = remainder_r2(state)?;
    let (_, at_zero) = l_inv_zk_with_zero(&r2.sub(&t))?;
    let mu = 3.0 / (4.0 * alpha) * at_zero;
    if !mu.is_finite() || mu.abs() >= 1.0 {
        return Err(Error::ConstructionInvalid(format!(
            "mu update produced {mu}"
        )));
    }
    Ok(mu)
}

/// Analytic log-derivative pair of the null-structure weight
/// `wbar^xi = (sin 2theta)^{-xi/2} w_z z^{1/2 - 3/(2 alpha)} (cos theta)^{-1/2}`,
/// assembled factor by factor:
/// returns `(D_theta wbar / wbar, D_z wbar / wbar)` at `(z, theta)`.
pub fn wbar_log_derivatives(z: f64, theta: f64, xi: f64, params: &ModelParams) -> (f64, f64) {
    let beta = params.beta();
    let alpha = params.alpha();
    // angular factors: d/dtheta ln sin(2t)^{-xi/2} = -xi cos2t / sin2t,
    // d/dtheta ln cos(t)^{-1/2} = tan(t)/2; multiply by sin(2t).
    let dtheta = -xi * (2.0 * theta).cos() + (2.0 * theta).sin() * theta.tan() / 2.0;
    // radial factors: D_z ln w_z = -(2/beta)/(1 + z^{1/beta}),
    // D_z ln z^{1/2 - 3/(2a)} = 1/2 - 3/(2a).
    let p = z.powf(1.0 / beta);
    let dz = -(2.0 / beta) / (1.0 + p) + 0.5 - 1.5 / alpha;
    (dtheta, dz)
}

//! Fake-time relaxation of the perturbation system
//! `d_tau g + L_Gamma(g) = -T + R0 + R1 + R2` from `g = 0` toward a steady
//! state, tracking norms, `mu` and `gamma`.

use crate::banded::{BandLu, BandMatrix};
use crate::dynamics::{remainder_r0, remainder_r1, remainder_r2, transport, SystemState};
use crate::elliptic::{EllipticSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{d_z, fd_weights, Field, Grids, RadialFn};
use crate::params::ModelParams;
use crate::profiles::{l_inv_gamma_star_raw, FundamentalProfile};
use crate::spaces::{l_inv_zk, l_inv_zk_with_zero, norm, NormKind};
use crate::weights::{weight_radial, WeightKind};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Implicit drift `g + beta D_z g`, explicit everything else.
    Imex,
    /// Fully explicit classical RK4 (debug fallback; needs small dtau).
    Rk4,
}

/// Which right-hand side to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Forcing {
    /// The full perturbation system.
    Full,
    /// `T = R0 = R1 = R2 = 0`: the linear operator alone (zero fixed point).
    Zeroed,
    /// Pure core-operator dynamics `d_tau g + L^beta(g) = 0`.
    CoreOnly,
}

#[derive(Debug, Clone)]
pub struct RelaxOptions {
    pub dtau: f64,
    pub max_steps: usize,
    /// Stop when `||d_tau g||_{H^-1} < stop_tol`.
    pub stop_tol: f64,
    pub scheme: Scheme,
    pub forcing: Forcing,
    /// Damping `kappa` of the lagged `mu` update.
    pub mu_damping: f64,
    /// Record full norms every this many steps.
    pub history_stride: usize,
    /// Declare instability when `||g||_{H^2_eta} > instability_factor * alpha`.
    pub instability_factor: f64,
    pub solver: SolverConfig,
    /// Starting field; zero when absent.
    pub initial: Option<Field>,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            dtau: 0.01,
            max_steps: 4000,
            stop_tol: 1e-7,
            scheme: Scheme::Imex,
            forcing: Forcing::Full,
            mu_damping: 0.5,
            history_stride: 5,
            instability_factor: 10.0,
            solver: SolverConfig::default(),
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub tau: f64,
    pub h_minus1: f64,
    pub h2_eta: f64,
    pub e2_eta: f64,
    pub mu_abs: f64,
    /// `||d_tau g||_{H^-1}` measured from the last step.
    pub dtau_norm: f64,
    /// `||g w_z||_{L^2}`, the energy controlled by the core identity.
    pub wz_l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Converged,
    MaxSteps,
    /// Norm guard tripped; the state carries the history for diagnosis.
    Instability,
}

pub struct RelaxationState {
    pub tau: f64,
    pub g: Field,
    pub mu: f64,
    pub gamma: f64,
    pub params: ModelParams,
    pub history: Vec<HistoryEntry>,
    pub stop_reason: StopReason,
}

impl RelaxationState {
    /// Treat a non-converged stop as an error (the instability contract).
    pub fn ensure_not_unstable(&self) -> Result<&Self> {
        if self.stop_reason == StopReason::Instability {
            let last = self.history.last();
            return Err(Error::Instability(format!(
                "relaxation left the stable regime at tau = {} (last entry: {:?})",
                self.tau, last
            )));
        }
        Ok(self)
    }
}

/// Factored implicit drift `(1 + dtau) I + dtau beta D_z` with pinned
/// boundary rows, one banded solve per theta column.
struct ImplicitDrift {
    lu: BandLu,
    n_z: usize,
}

impl ImplicitDrift {
    fn new(grids: &Arc<Grids>, beta: f64, dtau: f64) -> Result<Self> {
        let n_z = grids.radial.len();
        let h = grids.radial.h;
        let c1 = fd_weights(&[-2, -1, 0, 1, 2], 1);
        let mut m = BandMatrix::new(n_z, 2, 2);
        for i in 0..n_z {
            if i < 2 || i >= n_z - 2 {
                m.set(i, i, 1.0);
                continue;
            }
            m.add(i, i, 1.0 + dtau);
            for (s, off) in (-2i64..=2).enumerate() {
                m.add(i, (i as i64 + off) as usize, dtau * beta * c1[s] / h);
            }
        }
        Ok(ImplicitDrift {
            lu: m.factor()?,
            n_z,
        })
    }

    /// Solve the drift system column-by-column in theta.
    fn advance(&self, rhs: &Field) -> Field {
        let mut out = Field::zeros(&rhs.grids);
        let n_t = rhs.n_theta();
        let mut col = vec![0.0; self.n_z];
        for j in 0..n_t {
            for i in 0..self.n_z {
                col[i] = rhs.values[[i, j]];
            }
            col[0] = 0.0;
            col[1] = 0.0;
            col[self.n_z - 2] = 0.0;
            col[self.n_z - 1] = 0.0;
            self.lu.solve(&mut col);
            for i in 0..self.n_z {
                out.values[[i, j]] = col[i];
            }
        }
        out
    }
}

fn pin_boundary(g: &mut Field) {
    let n_z = g.n_z();
    for i in [0, 1, n_z - 2, n_z - 1] {
        for j in 0..g.n_theta() {
            g.values[[i, j]] = 0.0;
        }
    }
}

/// Everything on the right-hand side of the advance other than the
/// implicit drift: for the full system
/// `damp g + (3/2a) L^{-1}_{z,K}(g) F*_gamma - T + R0 + R1 + R2`.
struct StepForcing<'a> {
    params: ModelParams,
    profile_field: Field,
    damp: RadialFn,
    forcing: Forcing,
    solver: Option<&'a EllipticSolver>,
}

impl StepForcing<'_> {
    /// (explicit part, transport and R2) — the pair is reused by the mu
    /// update when the full forcing is active.
    fn eval(&self, g: &Field) -> Result<(Field, Option<(Field, Field)>)> {
        let alpha = self.params.alpha();
        match self.forcing {
            Forcing::CoreOnly => Ok((g.mul_radial(&self.damp), None)),
            Forcing::Zeroed => {
                let lzk = l_inv_zk(g)?;
                let expl = g
                    .mul_radial(&self.damp)
                    .add(&self.profile_field.mul_radial(&lzk).scale(1.5 / alpha));
                Ok((expl, None))
            }
            Forcing::Full => {
                let solver = self.solver.expect("full forcing needs the elliptic solver");
                let f = self.profile_field.add(g);
                let potential = solver.solve(&f)?;
                let state = SystemState {
                    params: self.params,
                    g: g.clone(),
                    f,
                    potential,
                };
                let t = transport(&state.potential, &state.f, alpha);
                let r2 = remainder_r2(&state)?;
                let r0 = remainder_r0(&g.grids, &self.params)?;
                let r1 = remainder_r1(g, &self.params);
                let lzk = l_inv_zk(g)?;
                let expl = g
                    .mul_radial(&self.damp)
                    .add(&self.profile_field.mul_radial(&lzk).scale(1.5 / alpha))
                    .sub(&t)
                    .add(&r0)
                    .add(&r1)
                    .add(&r2);
                Ok((expl, Some((t, r2))))
            }
        }
    }

    /// Full right-hand side `d_tau g` for the explicit scheme.
    fn rhs(&self, g: &Field) -> Result<Field> {
        let (expl, _) = self.eval(g)?;
        let beta = self.params.beta();
        let dz = d_z(g);
        Ok(expl.sub(g).sub(&dz.scale(beta)))
    }
}

/// Integrate the fake-time system; see [`RelaxOptions`] for the knobs.
pub fn relax(
    params: &ModelParams,
    grids: &Arc<Grids>,
    options: &RelaxOptions,
) -> Result<RelaxationState> {
    if !grids.radial.resolves_weights(params.beta(), 1e-2) {
        return Err(Error::Config(format!(
            "grid truncation does not resolve the w_z transition for beta = {}",
            params.beta()
        )));
    }
    let alpha = params.alpha();
    let mut mu = params.mu();
    let mut cur = params.with_mu(mu)?;
    let mut g = match &options.initial {
        Some(f) => f.clone(),
        None => Field::zeros(grids),
    };
    pin_boundary(&mut g);

    let solver = match options.forcing {
        Forcing::Full => Some(EllipticSolver::new(grids, alpha, options.solver)?),
        _ => None,
    };
    let drift = match options.scheme {
        Scheme::Imex => Some(ImplicitDrift::new(grids, params.beta(), options.dtau)?),
        Scheme::Rk4 => None,
    };

    let mut history = Vec::new();
    let mut tau = 0.0;
    let mut stop_reason = StopReason::MaxSteps;

    for step in 0..options.max_steps {
        // profile at the current gamma
        let prof = FundamentalProfile::for_params(&cur)?;
        let profile_field = Field::from_fn(grids, |z, t| prof.eval(z, t));
        let gamma = cur.gamma();
        let damp = RadialFn::from_fn(grids, |z| l_inv_gamma_star_raw(z, gamma));
        let forcing = StepForcing {
            params: cur,
            profile_field,
            damp,
            forcing: options.forcing,
            solver: solver.as_ref(),
        };

        // advance; refresh mu (lagged, damped) from the assembled parts
        let g_new = match options.scheme {
            Scheme::Imex => {
                let (expl, parts) = forcing.eval(&g)?;
                if let Some((t, r2)) = &parts {
                    let (_, at_zero) = l_inv_zk_with_zero(&r2.sub(t))?;
                    let mu_raw = 3.0 / (4.0 * alpha) * at_zero;
                    let mu_new = (1.0 - options.mu_damping) * mu + options.mu_damping * mu_raw;
                    if !mu_new.is_finite() || mu_new.abs() >= 1.0 {
                        return Err(Error::ConstructionInvalid(format!(
                            "mu left (-1, 1): {mu_new} at tau = {tau}"
                        )));
                    }
                    mu = mu_new;
                }
                let rhs = g.add(&expl.scale(options.dtau));
                drift.as_ref().unwrap().advance(&rhs)
            }
            Scheme::Rk4 => {
                let dt = options.dtau;
                let k1 = forcing.rhs(&g)?;
                let k2 = forcing.rhs(&g.add(&k1.scale(dt / 2.0)))?;
                let k3 = forcing.rhs(&g.add(&k2.scale(dt / 2.0)))?;
                let k4 = forcing.rhs(&g.add(&k3.scale(dt)))?;
                if options.forcing == Forcing::Full {
                    let (_, parts) = forcing.eval(&g)?;
                    if let Some((t, r2)) = parts {
                        let (_, at_zero) = l_inv_zk_with_zero(&r2.sub(&t))?;
                        let mu_raw = 3.0 / (4.0 * alpha) * at_zero;
                        mu = (1.0 - options.mu_damping) * mu + options.mu_damping * mu_raw;
                        if !mu.is_finite() || mu.abs() >= 1.0 {
                            return Err(Error::ConstructionInvalid(format!(
                                "mu left (-1, 1): {mu} at tau = {tau}"
                            )));
                        }
                    }
                }
                let mut out = g.add(
                    &k1.add(&k2.scale(2.0))
                        .add(&k3.scale(2.0))
                        .add(&k4)
                        .scale(dt / 6.0),
                );
                pin_boundary(&mut out);
                out
            }
        };

        let delta = g_new.sub(&g);
        let dtau_norm = norm(&delta, NormKind::HMinus1, &cur)? / options.dtau;
        g = g_new;
        tau += options.dtau;
        cur = cur.with_mu(mu)?;

        if !g.is_finite() {
            return Err(Error::NonFinite(format!("relaxation state at tau = {tau}")));
        }

        let converged = dtau_norm < options.stop_tol;
        let record = step % options.history_stride == 0
            || step + 1 == options.max_steps
            || converged;
        if record {
            let wz = weight_radial(WeightKind::WZ, grids, &cur)?.broadcast();
            let wz_l2 = crate::grid::inner(&g, &g, Some(&wz)).sqrt();
            let entry = HistoryEntry {
                tau,
                h_minus1: norm(&g, NormKind::HMinus1, &cur)?,
                h2_eta: if options.forcing == Forcing::Full {
                    norm(&g, NormKind::H2Eta, &cur)?
                } else {
                    0.0
                },
                e2_eta: if options.forcing == Forcing::Full {
                    norm(&g, NormKind::E2Eta, &cur)?
                } else {
                    0.0
                },
                mu_abs: mu.abs(),
                dtau_norm,
                wz_l2,
            };
            let unstable = options.forcing == Forcing::Full
                && entry.h2_eta > options.instability_factor * alpha;
            history.push(entry);
            if unstable {
                return Ok(RelaxationState {
                    tau,
                    g,
                    mu,
                    gamma: cur.gamma(),
                    params: cur,
                    history,
                    stop_reason: StopReason::Instability,
                });
            }
        }

        if converged {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    Ok(RelaxationState {
        tau,
        g,
        mu,
        gamma: cur.gamma(),
        params: cur,
        history,
        stop_reason,
    })
}

/// Self-certifying steady-state residual
/// `||L_Gamma(g) + T - R0 - R1 - R2||_{H^-1}` at the state's parameters.
pub fn steady_residual(state: &RelaxationState, solver: &EllipticSolver) -> Result<f64> {
    let params = state.params;
    let prof = FundamentalProfile::for_params(&params)?;
    let grids = &state.g.grids;
    let fs = Field::from_fn(grids, |z, t| prof.eval(z, t));
    let f = fs.add(&state.g);
    let potential = solver.solve(&f)?;
    let sys = SystemState {
        params,
        g: state.g.clone(),
        f,
        potential,
    };
    let t = transport(&sys.potential, &sys.f, params.alpha());
    let r0 = remainder_r0(grids, &params)?;
    let r1 = remainder_r1(&state.g, &params);
    let r2 = remainder_r2(&sys)?;
    let lg = crate::dynamics::linear_op(&state.g, &params)?;
    let resid = lg.add(&t).sub(&r0).sub(&r1).sub(&r2);
    norm(&resid, NormKind::HMinus1, &params)
}

/// Boundary moment `|L^{-1}_{z,K}(g)(0)|`, which vanishes at the converged
/// steady state through the choice of `mu`.
pub fn boundary_moment(g: &Field) -> Result<f64> {
    Ok(l_inv_zk_with_zero(g)?.1.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grids, GridConfig};

    fn small_grids() -> Arc<Grids> {
        make_grids(GridConfig {
            n_z: 256,
            n_theta: 96,
            ..Default::default()
        })
        .unwrap()
    }

    fn params() -> ModelParams {
        ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap()
    }

    #[test]
    fn zeroed_forcing_keeps_zero_fixed_point() {
        let p = params();
        let g = small_grids();
        let opts = RelaxOptions {
            forcing: Forcing::Zeroed,
            max_steps: 20,
            dtau: 0.05,
            stop_tol: 0.0,
            ..Default::default()
        };
        let state = relax(&p, &g, &opts).unwrap();
        assert_eq!(state.g.max_abs(), 0.0);
        assert_eq!(state.mu, 0.0);
    }

    #[test]
    fn core_only_decay_matches_the_energy_law() {
        // d/dtau ||g w_z||^2 = -2 (1 - beta/2) ||g w_z||^2 exactly
        let g = small_grids();
        for &beta in &[0.5, 1.0] {
            let p = ModelParams::new_unchecked(0.04, beta, 0.1 * beta, 0.0).unwrap();
            let q = 2.0 / beta + 1.5;
            let bump = Field::from_fn(&g, |z, _| z.powf(q) * (-z).exp());
            let opts = RelaxOptions {
                forcing: Forcing::CoreOnly,
                scheme: Scheme::Rk4,
                dtau: 0.02,
                max_steps: 100,
                stop_tol: 0.0,
                history_stride: 1,
                initial: Some(bump),
                ..Default::default()
            };
            let state = relax(&p, &g, &opts).unwrap();
            let h = &state.history;
            assert!(h.len() >= 90);
            // fit the decay rate of ln wz_l2^2 over the run
            let t0 = h[10].tau;
            let t1 = h[h.len() - 1].tau;
            let rate = -2.0 * (h[h.len() - 1].wz_l2.ln() - h[10].wz_l2.ln()) / (t1 - t0);
            let exact = 2.0 * (1.0 - beta / 2.0);
            let rel = ((rate - exact) / exact).abs();
            assert!(rel < 0.02, "beta = {beta}: rate {rate} vs {exact} ({rel:.4})");
        }
    }

    #[test]
    fn gamma_mu_coupling_sign() {
        let p = params();
        let g = small_grids();
        let opts = RelaxOptions {
            max_steps: 3,
            dtau: 0.02,
            history_stride: 1,
            ..Default::default()
        };
        let state = relax(&p, &g, &opts).unwrap();
        // sign(gamma - beta) = sign(mu); exact by the coupling
        assert_eq!(
            (state.gamma - state.params.beta()).signum(),
            state.mu.signum()
        );
        assert!(state.mu != 0.0);
    }
}

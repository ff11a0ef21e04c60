//! Run configuration: a versioned TOML file plus flag overrides
//! (flags win).

use serde::{Deserialize, Serialize};
use ssblow::elliptic::SolverConfig;
use ssblow::relaxation::{Forcing, RelaxOptions, Scheme};
use ssblow::{GridConfig, ModelParams};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamsSection {
    pub alpha: f64,
    pub beta: f64,
    pub one_minus_eta: f64,
    pub mu: f64,
    pub unchecked: bool,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            alpha: 0.05,
            beta: 1.0,
            one_minus_eta: 0.2,
            mu: 0.0,
            unchecked: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    pub n_z: usize,
    pub n_theta: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub endpoint_refinement: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridConfig::default();
        GridSection {
            n_z: g.n_z,
            n_theta: g.n_theta,
            z_min: g.z_min,
            z_max: g.z_max,
            endpoint_refinement: g.endpoint_refinement,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSection {
    pub n_modes: usize,
    pub compat_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            n_modes: s.n_modes,
            compat_tol: s.compat_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RelaxSection {
    pub dtau: f64,
    pub max_steps: usize,
    pub stop_tol: f64,
    /// "imex" or "rk4".
    pub scheme: String,
    pub mu_damping: f64,
    pub history_stride: usize,
}

impl Default for RelaxSection {
    fn default() -> Self {
        let r = RelaxOptions::default();
        RelaxSection {
            dtau: r.dtau,
            max_steps: r.max_steps,
            stop_tol: r.stop_tol,
            scheme: "imex".into(),
            mu_damping: r.mu_damping,
            history_stride: r.history_stride,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub schema_version: Option<u32>,
    pub params: ParamsSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub relax: RelaxSection,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{path:?}: {e}"))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| format!("{path:?}: {e}"))?;
        match cfg.schema_version {
            Some(SCHEMA_VERSION) => Ok(cfg),
            Some(v) => Err(format!("unsupported schema_version {v} (expected {SCHEMA_VERSION})")),
            None => Err("config file must declare schema_version".into()),
        }
    }

    pub fn model_params(&self) -> Result<ModelParams, ssblow::Error> {
        let p = &self.params;
        if p.unchecked {
            ModelParams::new_unchecked(p.alpha, p.beta, p.one_minus_eta, p.mu)
        } else {
            ModelParams::new(p.alpha, p.beta, p.one_minus_eta, p.mu)
        }
    }

    pub fn grid_config(&self) -> GridConfig {
        GridConfig {
            n_z: self.grid.n_z,
            n_theta: self.grid.n_theta,
            z_min: self.grid.z_min,
            z_max: self.grid.z_max,
            endpoint_refinement: self.grid.endpoint_refinement,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            n_modes: self.solver.n_modes,
            compat_tol: self.solver.compat_tol,
        }
    }

    pub fn relax_options(&self) -> Result<RelaxOptions, String> {
        let scheme = match self.relax.scheme.as_str() {
            "imex" => Scheme::Imex,
            "rk4" => Scheme::Rk4,
            other => return Err(format!("unknown scheme '{other}' (imex | rk4)")),
        };
        Ok(RelaxOptions {
            dtau: self.relax.dtau,
            max_steps: self.relax.max_steps,
            stop_tol: self.relax.stop_tol,
            scheme,
            forcing: Forcing::Full,
            mu_damping: self.relax.mu_damping,
            history_stride: self.relax.history_stride,
            instability_factor: 10.0,
            solver: self.solver_config(),
            initial: None,
        })
    }
}

//! Tensor-product discretization of `[z_min, z_max] x (0, pi/2)`:
//! a log-uniform radial grid and a composite Gauss-Legendre angular grid
//! with geometric endpoint refinement, plus the discrete operators
//! `D_z = z d/dz`, `D_theta = sin(2 theta) d/dtheta` and weighted inner
//! products.

use crate::error::{Error, Result};
use crate::quad::{differentiation_matrix, trapezoid_uniform, Panel};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Grid construction parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_z: usize,
    pub n_theta: usize,
    pub z_min: f64,
    pub z_max: f64,
    /// Geometric refinement levels toward each theta endpoint.
    pub endpoint_refinement: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_z: 512,
            n_theta: 128,
            z_min: 1e-6,
            z_max: 1e6,
            endpoint_refinement: 6,
        }
    }
}

/// Log-uniform radial grid on `[z_min, z_max]`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    /// Strictly increasing positive nodes.
    pub nodes: Vec<f64>,
    /// ln(nodes), uniform spacing `h`.
    pub ln_nodes: Vec<f64>,
    /// Uniform spacing in ln z.
    pub h: f64,
    /// Quadrature weights for `int . dz` (trapezoid in ln z).
    pub quad_weights: Vec<f64>,
    pub z_min: f64,
    pub z_max: f64,
}

impl RadialGrid {
    fn build(n_z: usize, z_min: f64, z_max: f64) -> Result<Self> {
        if n_z < 8 {
            return Err(Error::Config(format!("n_z must be >= 8, got {n_z}")));
        }
        if !(z_min > 0.0 && z_min < 1.0 && z_max > 1.0) {
            return Err(Error::Config(format!(
                "need 0 < z_min < 1 < z_max, got z_min = {z_min}, z_max = {z_max}"
            )));
        }
        let x0 = z_min.ln();
        let x1 = z_max.ln();
        let h = (x1 - x0) / (n_z - 1) as f64;
        let ln_nodes: Vec<f64> = (0..n_z).map(|i| x0 + h * i as f64).collect();
        let nodes: Vec<f64> = ln_nodes.iter().map(|x| x.exp()).collect();
        let quad_weights: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let w = if i == 0 || i == n_z - 1 { 0.5 } else { 1.0 };
                w * h * z
            })
            .collect();
        Ok(RadialGrid {
            nodes,
            ln_nodes,
            h,
            quad_weights,
            z_min,
            z_max,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when the truncation resolves the `w_z` transition for this
    /// `beta`: both `z_min^{1/beta}` and `z_max^{-1/beta}` fall below
    /// `threshold`.
    pub fn resolves_weights(&self, beta: f64, threshold: f64) -> bool {
        self.z_min.powf(1.0 / beta) < threshold && self.z_max.powf(-1.0 / beta) < threshold
    }
}

/// Composite Gauss-Legendre angular grid on `(0, pi/2)`, panels refined
/// geometrically toward both endpoints.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    /// All nodes, ascending, strictly interior to `(0, pi/2)`.
    pub nodes: Vec<f64>,
    /// Matching quadrature weights for `int . dtheta`.
    pub quad_weights: Vec<f64>,
    /// Panel boundaries (for diagnostics).
    pub panels: Vec<(f64, f64)>,
    /// First flat node index of each panel.
    panel_offsets: Vec<usize>,
    /// Per-panel dense differentiation matrices.
    diff_matrices: Vec<Vec<Vec<f64>>>,
}

impl AngularGrid {
    fn build(n_theta: usize, levels: usize) -> Result<Self> {
        if n_theta < 8 {
            return Err(Error::Config(format!("n_theta must be >= 8, got {n_theta}")));
        }
        let quarter = PI / 4.0;
        let ratio: f64 = 0.25;
        // Left-half panel edges: [0, e_L], [e_L, e_{L-1}], ..., [e_1, pi/4].
        let mut edges: Vec<f64> = (0..=levels).map(|j| quarter * ratio.powi(j as i32)).collect();
        edges.push(0.0);
        edges.reverse(); // ascending: 0, e_L, ..., e_1, pi/4
        let mut half_panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();

        // Node budget per half: a small floor on every refined panel (they
        // only resolve the weight singularity) and the remainder spread
        // proportionally to panel length, since the oscillation load of the
        // sine modes scales with length.
        let floor = 6usize;
        let half_budget = (n_theta / 2).max(floor * half_panels.len() + 8);
        let lens: Vec<f64> = half_panels.iter().map(|(a, b)| b - a).collect();
        let total_len: f64 = lens.iter().sum();
        let extra = half_budget - floor * half_panels.len();
        let mut counts: Vec<usize> = lens
            .iter()
            .map(|l| floor + (extra as f64 * l / total_len).round() as usize)
            .collect();
        // Absorb rounding drift into the largest (last) panel.
        let assigned: usize = counts.iter().sum();
        let last = counts.len() - 1;
        if assigned < half_budget {
            counts[last] += half_budget - assigned;
        } else if assigned > half_budget {
            counts[last] = counts[last].saturating_sub(assigned - half_budget).max(floor);
        }

        // Mirror for the right half [pi/4, pi/2].
        let mut panels: Vec<(f64, f64, usize)> = half_panels
            .iter()
            .zip(&counts)
            .map(|(&(a, b), &c)| (a, b, c))
            .collect();
        half_panels.reverse();
        let mut right: Vec<(f64, f64, usize)> = half_panels
            .iter()
            .zip(counts.iter().rev())
            .map(|(&(a, b), &c)| (PI / 2.0 - b, PI / 2.0 - a, c))
            .collect();
        panels.append(&mut right);

        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panel_offsets = Vec::new();
        let mut diff_matrices = Vec::new();
        let mut bounds = Vec::new();
        for (a, b, c) in panels {
            let p = Panel::new(a, b, c);
            panel_offsets.push(nodes.len());
            diff_matrices.push(differentiation_matrix(&p.nodes));
            nodes.extend_from_slice(&p.nodes);
            weights.extend_from_slice(&p.weights);
            bounds.push((a, b));
        }
        Ok(AngularGrid {
            nodes,
            quad_weights: weights,
            panels: bounds,
            panel_offsets,
            diff_matrices,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// d/dtheta of nodal samples, one panel at a time (barycentric).
    pub fn differentiate(&self, values: &[f64], out: &mut [f64]) {
        for (p, d) in self.diff_matrices.iter().enumerate() {
            let off = self.panel_offsets[p];
            let n = d.len();
            for j in 0..n {
                let mut s = 0.0;
                for (k, row) in d[j].iter().enumerate() {
                    s += row * values[off + k];
                }
                out[off + j] = s;
            }
        }
    }
}

/// The pair of grids every field lives on.
#[derive(Debug, Clone)]
pub struct Grids {
    pub radial: RadialGrid,
    pub angular: AngularGrid,
    pub config: GridConfig,
}

/// Build the tensor grid pair from a configuration.
pub fn make_grids(config: GridConfig) -> Result<Arc<Grids>> {
    let radial = RadialGrid::build(config.n_z, config.z_min, config.z_max)?;
    let angular = AngularGrid::build(config.n_theta, config.endpoint_refinement)?;
    Ok(Arc::new(Grids {
        radial,
        angular,
        config,
    }))
}

/// Scalar samples on the tensor grid, row `i` = radial node, column `j` =
/// angular node.
#[derive(Debug, Clone)]
pub struct Field {
    pub values: Array2<f64>,
    pub grids: Arc<Grids>,
}

/// Samples of a radial-only function.
#[derive(Debug, Clone)]
pub struct RadialFn {
    pub values: Array1<f64>,
    pub grids: Arc<Grids>,
}

impl Field {
    pub fn zeros(grids: &Arc<Grids>) -> Self {
        Field {
            values: Array2::zeros((grids.radial.len(), grids.angular.len())),
            grids: grids.clone(),
        }
    }

    pub fn from_fn(grids: &Arc<Grids>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut v = Array2::zeros((grids.radial.len(), grids.angular.len()));
        for (i, &z) in grids.radial.nodes.iter().enumerate() {
            for (j, &th) in grids.angular.nodes.iter().enumerate() {
                v[[i, j]] = f(z, th);
            }
        }
        Field { values: v, grids: grids.clone() }
    }

    /// Separable product `radial(z) * angular(theta)`.
    pub fn separable(grids: &Arc<Grids>, radial: impl Fn(f64) -> f64, angular: impl Fn(f64) -> f64) -> Self {
        let r: Vec<f64> = grids.radial.nodes.iter().map(|&z| radial(z)).collect();
        let a: Vec<f64> = grids.angular.nodes.iter().map(|&t| angular(t)).collect();
        let mut v = Array2::zeros((r.len(), a.len()));
        for i in 0..r.len() {
            for j in 0..a.len() {
                v[[i, j]] = r[i] * a[j];
            }
        }
        Field { values: v, grids: grids.clone() }
    }

    pub fn n_z(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_theta(&self) -> usize {
        self.values.ncols()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            values: self.values.mapv(|v| f(v)),
            grids: self.grids.clone(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        let mut v = self.values.clone();
        v.zip_mut_with(&other.values, |a, &b| *a = f(*a, b));
        Field { values: v, grids: self.grids.clone() }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    /// Multiply each row by a radial profile.
    pub fn mul_radial(&self, r: &RadialFn) -> Field {
        let mut v = self.values.clone();
        for (i, mut row) in v.outer_iter_mut().enumerate() {
            let c = r.values[i];
            row.mapv_inplace(|x| x * c);
        }
        Field { values: v, grids: self.grids.clone() }
    }

    /// Multiply each column by an angular profile sampled on the grid.
    pub fn mul_angular(&self, a: &[f64]) -> Field {
        let mut v = self.values.clone();
        for mut row in v.outer_iter_mut() {
            for (j, x) in row.iter_mut().enumerate() {
                *x *= a[j];
            }
        }
        Field { values: v, grids: self.grids.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Unweighted L2 norm over the truncated domain (tensor quadrature).
    pub fn l2(&self) -> f64 {
        inner(self, self, None).sqrt()
    }
}

impl RadialFn {
    pub fn zeros(grids: &Arc<Grids>) -> Self {
        RadialFn {
            values: Array1::zeros(grids.radial.len()),
            grids: grids.clone(),
        }
    }

    pub fn from_fn(grids: &Arc<Grids>, f: impl Fn(f64) -> f64) -> Self {
        RadialFn {
            values: grids.radial.nodes.iter().map(|&z| f(z)).collect(),
            grids: grids.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialFn {
        RadialFn {
            values: self.values.mapv(|v| f(v)),
            grids: self.grids.clone(),
        }
    }

    pub fn zip_map(&self, other: &RadialFn, f: impl Fn(f64, f64) -> f64) -> RadialFn {
        let mut v = self.values.clone();
        v.zip_mut_with(&other.values, |a, &b| *a = f(*a, b));
        RadialFn { values: v, grids: self.grids.clone() }
    }

    pub fn scale(&self, c: f64) -> RadialFn {
        self.map(|v| c * v)
    }

    /// Promote to a theta-independent field.
    pub fn broadcast(&self) -> Field {
        let n_t = self.grids.angular.len();
        let mut v = Array2::zeros((self.values.len(), n_t));
        for (i, mut row) in v.outer_iter_mut().enumerate() {
            row.fill(self.values[i]);
        }
        Field { values: v, grids: self.grids.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// L2_z norm, `(int f^2 dz)^{1/2}`.
    pub fn l2_z(&self) -> f64 {
        let g = &self.grids.radial;
        let s: f64 = self
            .values
            .iter()
            .zip(&g.quad_weights)
            .map(|(v, w)| v * v * w)
            .sum();
        s.sqrt()
    }
}

/// Finite-difference weights for the `order`-th derivative at offset 0 of a
/// stencil at the given integer offsets (Vandermonde solve; exact for the
/// interpolating polynomial).
pub fn fd_weights(offsets: &[i64], order: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (k, row) in a.iter_mut().enumerate() {
        for (j, &t) in offsets.iter().enumerate() {
            row[j] = (t as f64).powi(k as i32);
        }
        // k-th moment of the derivative functional: d^order/dx^order x^k at 0
        row[n] = if k == order {
            (1..=order).product::<usize>() as f64
        } else {
            0.0
        };
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for j in col..=n {
            a[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in col..=n {
                    a[i][j] -= f * a[col][j];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n]).collect()
}

/// Differentiate uniformly-spaced samples: 4th-order centered stencils,
/// one-sided at the ends. `order` is 1 or 2.
pub fn derivative_uniform(f: &[f64], h: f64, order: usize) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 7, "grid too coarse for the 4th-order stencil");
    let width = if order == 1 { 5 } else { 6 };
    let centered: Vec<f64> = if order == 1 {
        fd_weights(&[-2, -1, 0, 1, 2], 1)
    } else {
        fd_weights(&[-2, -1, 0, 1, 2], 2)
    };
    let scale = h.powi(order as i32);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (coeffs, base): (Vec<f64>, usize) = if i >= 2 && i + 2 < n {
            (centered.clone(), i - 2)
        } else {
            // One-sided stencil anchored at the boundary, same order.
            let start = if i < 2 { 0 } else { n - width };
            let offsets: Vec<i64> = (0..width).map(|k| (start + k) as i64 - i as i64).collect();
            (fd_weights(&offsets, order), start)
        };
        let mut s = 0.0;
        for (k, &c) in coeffs.iter().enumerate() {
            s += c * f[base + k];
        }
        out[i] = s / scale;
    }
    out
}

/// `D_z = z d/dz`, i.e. d/d(ln z) on the log-uniform grid (4th order).
pub fn d_z(f: &Field) -> Field {
    let g = &f.grids.radial;
    let mut out = Field::zeros(&f.grids);
    let n_t = f.n_theta();
    let mut col = vec![0.0; g.len()];
    for j in 0..n_t {
        for i in 0..g.len() {
            col[i] = f.values[[i, j]];
        }
        let d = derivative_uniform(&col, g.h, 1);
        for i in 0..g.len() {
            out.values[[i, j]] = d[i];
        }
    }
    out
}

/// Second logarithmic derivative `D_z^2` (direct 4th-order stencil).
pub fn d2_z(f: &Field) -> Field {
    let g = &f.grids.radial;
    let mut out = Field::zeros(&f.grids);
    let n_t = f.n_theta();
    let mut col = vec![0.0; g.len()];
    for j in 0..n_t {
        for i in 0..g.len() {
            col[i] = f.values[[i, j]];
        }
        let d = derivative_uniform(&col, g.h, 2);
        for i in 0..g.len() {
            out.values[[i, j]] = d[i];
        }
    }
    out
}

/// `D_z` of a radial function.
pub fn d_z_radial(f: &RadialFn) -> RadialFn {
    let g = &f.grids.radial;
    let d = derivative_uniform(f.values.as_slice().unwrap(), g.h, 1);
    RadialFn {
        values: Array1::from_vec(d),
        grids: f.grids.clone(),
    }
}

/// `D_z^2` of a radial function.
pub fn d2_z_radial(f: &RadialFn) -> RadialFn {
    let g = &f.grids.radial;
    let d = derivative_uniform(f.values.as_slice().unwrap(), g.h, 2);
    RadialFn {
        values: Array1::from_vec(d),
        grids: f.grids.clone(),
    }
}

/// `partial_theta` by per-panel barycentric differentiation.
pub fn partial_theta(f: &Field) -> Field {
    let ang = &f.grids.angular;
    let mut out = Field::zeros(&f.grids);
    let n_t = f.n_theta();
    let mut row = vec![0.0; n_t];
    let mut drow = vec![0.0; n_t];
    for i in 0..f.n_z() {
        for j in 0..n_t {
            row[j] = f.values[[i, j]];
        }
        ang.differentiate(&row, &mut drow);
        for j in 0..n_t {
            out.values[[i, j]] = drow[j];
        }
    }
    out
}

/// `D_theta = sin(2 theta) partial_theta`.
pub fn d_theta(f: &Field) -> Field {
    let mut out = partial_theta(f);
    let sines: Vec<f64> = f.grids.angular.nodes.iter().map(|t| (2.0 * t).sin()).collect();
    for mut row in out.values.outer_iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= sines[j];
        }
    }
    out
}

/// Tensor-product inner product `int int f g w^2 dtheta dz`. The weight is
/// applied as `(f w) * (g w)` pointwise before summation; `None` means the
/// unweighted L2 pairing.
pub fn inner(f: &Field, g: &Field, weight: Option<&Field>) -> f64 {
    assert_eq!(f.values.dim(), g.values.dim(), "field shapes must match");
    let rg = &f.grids.radial;
    let ag = &f.grids.angular;
    let mut total = 0.0;
    for i in 0..f.n_z() {
        let mut srow = 0.0;
        for j in 0..f.n_theta() {
            let (a, b) = match weight {
                Some(w) => {
                    let wij = w.values[[i, j]];
                    (f.values[[i, j]] * wij, g.values[[i, j]] * wij)
                }
                None => (f.values[[i, j]], g.values[[i, j]]),
            };
            srow += a * b * ag.quad_weights[j];
        }
        total += srow * rg.quad_weights[i];
    }
    total
}

/// Angular bracket at each radial node: `<f, a>_theta (z_i)`.
pub fn inner_theta(f: &Field, angular: &[f64]) -> RadialFn {
    let ag = &f.grids.angular;
    let mut out = RadialFn::zeros(&f.grids);
    for i in 0..f.n_z() {
        let mut s = 0.0;
        for j in 0..f.n_theta() {
            s += f.values[[i, j]] * angular[j] * ag.quad_weights[j];
        }
        out.values[i] = s;
    }
    out
}

/// Radial inner product of two radial functions with weight squared.
pub fn inner_z(f: &RadialFn, g: &RadialFn, weight: Option<&RadialFn>) -> f64 {
    let rg = &f.grids.radial;
    let mut total = 0.0;
    for i in 0..f.values.len() {
        let (a, b) = match weight {
            Some(w) => (f.values[i] * w.values[i], g.values[i] * w.values[i]),
            None => (f.values[i], g.values[i]),
        };
        total += a * b * rg.quad_weights[i];
    }
    total
}

/// `int f dz` over the truncated radial domain.
pub fn integral_z(f: &RadialFn) -> f64 {
    inner_z(f, &RadialFn::from_fn(&f.grids, |_| 1.0), None)
}

/// `int f dtheta` for angular samples.
pub fn integral_theta(grids: &Grids, samples: &[f64]) -> f64 {
    samples
        .iter()
        .zip(&grids.angular.quad_weights)
        .map(|(v, w)| v * w)
        .sum()
}

/// Trapezoid integral of ln-z samples (no Jacobian), `int f d(ln z)`.
pub fn integral_ln_z(f: &RadialFn) -> f64 {
    trapezoid_uniform(f.values.as_slice().unwrap(), f.grids.radial.h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grids() -> Arc<Grids> {
        make_grids(GridConfig::default()).unwrap()
    }

    #[test]
    fn default_grids_satisfy_invariants() {
        let g = grids();
        assert!(g.radial.nodes.windows(2).all(|p| p[0] < p[1] && p[0] > 0.0));
        assert!(g.angular.nodes.windows(2).all(|p| p[0] < p[1]));
        assert!(g.angular.nodes[0] > 0.0);
        assert!(*g.angular.nodes.last().unwrap() < PI / 2.0);
        assert!(g.angular.quad_weights.iter().all(|&w| w > 0.0));
        // int 1 dtheta = pi/2 to machine precision
        let one = vec![1.0; g.angular.len()];
        assert!((integral_theta(&g, &one) - PI / 2.0).abs() < 1e-12);
        // sum of radial weights ~ z_max - z_min to trapezoid order
        let total: f64 = g.radial.quad_weights.iter().sum();
        let exact = g.radial.z_max - g.radial.z_min;
        assert!((total - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(make_grids(GridConfig { n_z: 4, ..Default::default() }).is_err());
        assert!(make_grids(GridConfig { z_min: 2.0, ..Default::default() }).is_err());
        assert!(make_grids(GridConfig { n_theta: 4, ..Default::default() }).is_err());
    }

    #[test]
    fn d_z_on_monomial_is_exact_to_scheme_order() {
        let g = grids();
        // f = z^a has D_z f = a z^a exactly in ln z, so the FD error is zero
        // up to rounding (z^a = e^{a x} is not polynomial; error is O(h^4)).
        let f = Field::from_fn(&g, |z, _| z.powf(0.3));
        let d = d_z(&f);
        let mut max_rel: f64 = 0.0;
        for i in 0..f.n_z() {
            let z: f64 = g.radial.nodes[i];
            let exact = 0.3 * z.powf(0.3);
            let rel = ((d.values[[i, 0]] - exact) / exact).abs();
            max_rel = max_rel.max(rel);
        }
        assert!(max_rel < 1e-6, "max rel err {max_rel}");
    }

    #[test]
    fn d_z_of_constant_vanishes() {
        let g = grids();
        let f = Field::from_fn(&g, |_, _| 3.5);
        assert!(d_z(&f).max_abs() < 1e-12);
        assert!(partial_theta(&f).max_abs() < 1e-9);
    }

    #[test]
    fn d_theta_reproduces_double_angle() {
        let g = grids();
        let f = Field::from_fn(&g, |_, th| (2.0 * th).sin());
        let d = d_theta(&f);
        let mut max_err: f64 = 0.0;
        for j in 0..f.n_theta() {
            let th = g.angular.nodes[j];
            let exact = (4.0 * th).sin(); // sin(2t) * 2cos(2t)
            max_err = max_err.max((d.values[[0, j]] - exact).abs());
        }
        assert!(max_err < 1e-9, "max err {max_err}");
    }

    #[test]
    fn angular_quadrature_handles_high_modes() {
        // <sin(2k t), sin(2k t)> = pi/4; the squared top production mode
        // (frequency 128) is resolved loosely on the default budget and to
        // near machine precision at verification resolution.
        let g = grids();
        let s: Vec<f64> = g.angular.nodes.iter().map(|&t| (64.0 * t).sin()).collect();
        let prod: Vec<f64> = s.iter().map(|v| v * v).collect();
        let int = integral_theta(&g, &prod);
        assert!((int - PI / 4.0).abs() < 5e-3, "got {int}");

        let g = make_grids(GridConfig { n_theta: 192, ..Default::default() }).unwrap();
        let s: Vec<f64> = g.angular.nodes.iter().map(|&t| (64.0 * t).sin()).collect();
        let prod: Vec<f64> = s.iter().map(|v| v * v).collect();
        let int = integral_theta(&g, &prod);
        assert!((int - PI / 4.0).abs() < 1e-10, "got {int} at n_theta=192");
    }

    #[test]
    fn fd_weights_match_known_tables() {
        let c = fd_weights(&[-2, -1, 0, 1, 2], 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in c.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let c2 = fd_weights(&[-2, -1, 0, 1, 2], 2);
        let expect2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in c2.iter().zip(expect2.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

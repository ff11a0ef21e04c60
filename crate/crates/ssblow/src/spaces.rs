//! Integral operators `L^{-1}_z`, `L^{-1}_{z,K}`, the radial Green pieces,
//! and the weighted norms.

use crate::error::{Error, Result};
use crate::grid::{
    d2_z, d_theta, d_z, inner, inner_theta, inner_z, Field, Grids, RadialFn,
};
use crate::params::ModelParams;
use crate::profiles::{c_star, k_theta_raw};
use crate::quad::{cumulative_right_uniform, gauss_laguerre};
use crate::weights::{weight_field, weight_radial, WeightKind};
use ndarray::Array1;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Least-squares power-law fit `f ~ c z^{expnt}` over the node range
/// `[lo, hi)`; returns `(ln c, expnt)` in ln-z coordinates. `None` when the
/// data changes sign or is essentially zero there.
fn power_fit(f: &RadialFn, lo: usize, hi: usize) -> Option<(f64, f64)> {
    let vals = &f.values.as_slice().unwrap()[lo..hi];
    let scale = f.max_abs();
    let all_pos = vals.iter().all(|&v| v > 0.0);
    let all_neg = vals.iter().all(|&v| v < 0.0);
    if scale == 0.0 || (!all_pos && !all_neg) {
        return None;
    }
    let xs = &f.grids.radial.ln_nodes[lo..hi];
    let n = vals.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = vals.iter().map(|v| v.abs().ln()).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, v) in xs.iter().zip(vals) {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (v.abs().ln() - mean_y);
    }
    Some((mean_y, sxy / sxx))
}

/// Indices of the last decade of the grid.
fn top_decade(grids: &Grids) -> (usize, usize) {
    let n = grids.radial.len();
    let per_decade = ((n - 1) as f64 / (grids.radial.z_max / grids.radial.z_min).log10()).ceil();
    (n - (per_decade as usize).min(n / 2), n)
}

fn bottom_decade(grids: &Grids) -> (usize, usize) {
    let (lo, hi) = top_decade(grids);
    (0, hi - lo)
}

/// Threshold below which a tail is treated as numerically absent.
const NEGLIGIBLE_TAIL: f64 = 1e-12;
/// A sign-mixed or non-decaying window this small relative to the field is
/// still dropped: it cannot move the integral beyond roundoff.
const SOFT_NEGLIGIBLE_TAIL: f64 = 1e-7;
/// Minimum decay exponent accepted by the power-law tail closure.
const MIN_TAIL_EXPONENT: f64 = 0.1;

/// Integral of the fitted two-term tail model beyond one end of the grid.
///
/// The leading exponent `sigma` comes from the log-log slope over the edge
/// decade; the model `f ~ c1 e^{-sigma s} + c2 e^{-2 sigma s}` (with `s`
/// the ln-z distance past the edge) is then fitted linearly, capturing the
/// next-order curvature of profile-like tails. `side` is +1 for the far
/// tail, -1 for the below-grid head; returns `int f d(ln z)` past the edge.
fn tail_integral(f: &RadialFn, lo: usize, hi: usize, side: f64) -> Result<f64> {
    let samples = f.values.as_slice().unwrap();
    let scale = f.max_abs();
    let window_mag = samples[lo..hi].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || window_mag <= NEGLIGIBLE_TAIL * scale {
        return Ok(0.0);
    }
    let fitted = power_fit(f, lo, hi);
    let Some((_, slope)) = fitted else {
        if window_mag <= SOFT_NEGLIGIBLE_TAIL * scale {
            return Ok(0.0);
        }
        return Err(Error::Tail(
            "sign-changing window cannot be closed by a power law".into(),
        ));
    };
    // decay exponent measured away from the edge
    let sigma = -side * slope;
    if sigma <= MIN_TAIL_EXPONENT {
        if window_mag <= SOFT_NEGLIGIBLE_TAIL * scale {
            return Ok(0.0);
        }
        return Err(Error::Tail(format!(
            "fitted decay exponent {sigma:.4} <= {MIN_TAIL_EXPONENT} at grid edge"
        )));
    }
    // Linear least squares for c1, c2 on basis exp(sigma d), exp(2 sigma d),
    // d = ln-z distance from the edge into the window (the tail model decays
    // when moving past the edge, hence grows into the window). Returns the
    // fitted (c1, c2) at the edge and the misfit.
    let xs = &f.grids.radial.ln_nodes;
    let edge = if side > 0.0 { xs[xs.len() - 1] } else { xs[0] };
    let fit = |sig: f64| -> (f64, f64, f64) {
        let mut a11 = 0.0;
        let mut a12 = 0.0;
        let mut a22 = 0.0;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for i in lo..hi {
            let d = side * (edge - xs[i]);
            let e1 = (sig * d).exp();
            let e2 = (2.0 * sig * d).exp();
            a11 += e1 * e1;
            a12 += e1 * e2;
            a22 += e2 * e2;
            b1 += e1 * samples[i];
            b2 += e2 * samples[i];
        }
        let det = a11 * a22 - a12 * a12;
        let (c1, c2) = if det.abs() > 1e-12 * a11 * a22 {
            ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
        } else {
            (b1 / a11, 0.0)
        };
        let mut misfit = 0.0;
        for i in lo..hi {
            let d = side * (edge - xs[i]);
            let m = c1 * (sig * d).exp() + c2 * (2.0 * sig * d).exp();
            misfit += (samples[i] - m) * (samples[i] - m);
        }
        (c1, c2, misfit)
    };
    // The log-log slope is curvature-biased; refine sigma by golden-section
    // on the least-squares misfit.
    let golden = 0.618_033_988_749_895;
    let mut a = sigma / 1.6;
    let mut b = sigma * 1.6;
    let mut x1 = b - golden * (b - a);
    let mut x2 = a + golden * (b - a);
    let mut f1 = fit(x1).2;
    let mut f2 = fit(x2).2;
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = fit(x1).2;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = fit(x2).2;
        }
    }
    let sigma = 0.5 * (a + b);
    if sigma <= MIN_TAIL_EXPONENT {
        return Err(Error::Tail(format!(
            "refined decay exponent {sigma:.4} <= {MIN_TAIL_EXPONENT} at grid edge"
        )));
    }
    let (c1, c2, _) = fit(sigma);
    Ok(c1 / sigma + c2 / (2.0 * sigma))
}

/// `L^{-1}_z(f)(z) = int_z^inf f(rho) / rho drho`, computed as a cumulative
/// integral in ln z plus a fitted power-law tail beyond `z_max`.
pub fn l_inv_z(f: &RadialFn) -> Result<RadialFn> {
    let grids = &f.grids;
    let samples = f.values.as_slice().unwrap();
    let (lo, hi) = top_decade(grids);
    let tail = tail_integral(f, lo, hi, 1.0)?;
    let mut c = cumulative_right_uniform(samples, grids.radial.h);
    for v in c.iter_mut() {
        *v += tail;
    }
    Ok(RadialFn {
        values: Array1::from_vec(c),
        grids: grids.clone(),
    })
}

/// `L^{-1}_z(f)` together with its extrapolated value at `z = 0`
/// (adds the fitted below-grid contribution `int_0^{z_min} f drho/rho`).
pub fn l_inv_z_with_zero(f: &RadialFn) -> Result<(RadialFn, f64)> {
    let linv = l_inv_z(f)?;
    let (lo, hi) = bottom_decade(&f.grids);
    let below = tail_integral(f, lo, hi, -1.0)?;
    let at_zero = linv.values[0] + below;
    Ok((linv, at_zero))
}

/// `<f, K>_theta(z)`.
pub fn bracket_k(f: &Field) -> RadialFn {
    let k: Vec<f64> = f.grids.angular.nodes.iter().map(|&t| k_theta_raw(t)).collect();
    inner_theta(f, &k)
}

/// `L^{-1}_{z,K}(f) = L^{-1}_z(<f, K>_theta)`.
pub fn l_inv_zk(f: &Field) -> Result<RadialFn> {
    l_inv_z(&bracket_k(f))
}

/// `L^{-1}_{z,K}(f)` with its value at `z = 0`.
pub fn l_inv_zk_with_zero(f: &Field) -> Result<(RadialFn, f64)> {
    l_inv_z_with_zero(&bracket_k(f))
}

/// The smoothing kernel `(1/(5 alpha)) int_0^1 s^{5/alpha - 1} h(z s) ds`,
/// evaluated in the substitution form via Gauss-Laguerre so the stiff
/// exponent `5/alpha` never materializes. Constant input `c` maps to `c/25`.
pub fn g_tilde_kernel(h: &RadialFn, alpha: f64) -> Result<RadialFn> {
    if alpha <= 0.0 {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let m = 5.0 / alpha;
    let (us, ws) = gauss_laguerre(12);
    let interp = RadialInterp::new(h);
    let grids = &h.grids;
    let mut out = RadialFn::zeros(grids);
    for (i, &x) in grids.radial.ln_nodes.iter().enumerate() {
        let mut s = 0.0;
        for (&u, &w) in us.iter().zip(&ws) {
            s += w * interp.eval_ln(x - u / m);
        }
        out.values[i] = s / 25.0;
    }
    Ok(out)
}

/// Leading radial Green piece `G*(f) = (3/(4 alpha)) L^{-1}_{z,K}(f)`.
pub fn g_star(f: &Field, alpha: f64) -> Result<RadialFn> {
    if alpha <= 0.0 {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(l_inv_zk(f)?.scale(3.0 / (4.0 * alpha)))
}

/// Local degree-5 polynomial interpolation of radial samples in ln z.
pub struct RadialInterp<'a> {
    f: &'a RadialFn,
}

impl<'a> RadialInterp<'a> {
    pub fn new(f: &'a RadialFn) -> Self {
        RadialInterp { f }
    }

    /// Evaluate at `x = ln z`; clamps the stencil at the grid ends (mild
    /// extrapolation below `z_min` where profiles vanish).
    pub fn eval_ln(&self, x: f64) -> f64 {
        let g = &self.f.grids.radial;
        let n = g.len();
        let t = (x - g.ln_nodes[0]) / g.h;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        let base = i.saturating_sub(2).min(n - 6);
        // barycentric weights for 6 uniform nodes: (-1)^k C(5,k)
        const W: [f64; 6] = [1.0, -5.0, 10.0, -10.0, 5.0, -1.0];
        let s = t - base as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, &w) in W.iter().enumerate() {
            let d = s - k as f64;
            if d.abs() < 1e-12 {
                return self.f.values[base + k];
            }
            let c = w / d;
            num += c * self.f.values[base + k];
            den += c;
        }
        num / den
    }
}

/// Which norm to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// The coercivity norm paired with the main linear operator.
    HMinus1,
    /// `H^k`, k in 0..=4.
    H(usize),
    /// `H^{k,*}` with the `w_z^*` radial weight.
    HStar(usize),
    /// `E^k = alpha (||f w^lambda||^2 + ||D_z^k f w^lambda||^2)^{1/2}`.
    E(usize),
    /// The eta-weighted second-order norm used by the relaxation energy.
    H2Eta,
    /// Its super-singular companion.
    E2Eta,
    /// Purely radial weight Sobolev norm of order n.
    HWz(usize),
}

/// Mixed logarithmic derivatives `D_z^i D_theta^j f` for `i + j <= max_ord`.
fn derivative_table(f: &Field, max_ord: usize) -> Vec<Vec<Field>> {
    let mut table: Vec<Vec<Field>> = Vec::with_capacity(max_ord + 1);
    for i in 0..=max_ord {
        let mut row = Vec::with_capacity(max_ord + 1 - i);
        let base = if i == 0 {
            f.clone()
        } else {
            d_z(&table[i - 1][0])
        };
        row.push(base);
        for j in 1..=(max_ord - i) {
            let next = d_theta(&row[j - 1]);
            row.push(next);
        }
        table.push(row);
    }
    table
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Compute one norm of a field.
pub fn norm(f: &Field, which: NormKind, params: &ModelParams) -> Result<f64> {
    let grids = &f.grids;
    match which {
        NormKind::HMinus1 => {
            let beta = params.beta();
            let cb = c_star(beta, params.alpha())?;
            let wk = weight_field(WeightKind::WK, grids, params);
            let lzk = l_inv_zk(f)?;
            let wz = weight_radial(WeightKind::WZ, grids, params)?;
            let gsb = RadialFn::from_fn(grids, |z| crate::profiles::gamma_star_raw(z, beta));
            let linv_gsb =
                RadialFn::from_fn(grids, |z| crate::profiles::l_inv_gamma_star_raw(z, beta));
            let term1 = (2.0 - beta) / 2.0 * inner(f, f, Some(&wk));
            let w2 = wz.zip_map(&gsb, |w, g| w * g.sqrt());
            let term2 = (1.0 - beta) / (2.0 * cb * beta) * inner_z(&lzk, &lzk, Some(&w2));
            let w3 = wz
                .zip_map(&gsb.zip_map(&linv_gsb, |a, b| (a * b).sqrt()), |w, g| w * g);
            let term3 = 1.0 / (2.0 * cb * beta) * inner_z(&lzk, &lzk, Some(&w3));
            Ok((term1 + term2 + term3).sqrt())
        }
        NormKind::H(k) | NormKind::HStar(k) => {
            if k > 4 {
                return Err(Error::UnsupportedOrder { order: k, max: 4 });
            }
            let (we_kind, wl_kind) = if matches!(which, NormKind::H(_)) {
                (WeightKind::WEta, WeightKind::WLambda)
            } else {
                (WeightKind::WStarEta, WeightKind::WStarLambda)
            };
            let we = weight_field(we_kind, grids, params);
            let wl = weight_field(wl_kind, grids, params);
            let table = derivative_table(f, k);
            let mut total = 0.0;
            for i in 0..=k {
                total += inner(&table[i][0], &table[i][0], Some(&we));
                for j in 1..=(k - i) {
                    total += inner(&table[i][j], &table[i][j], Some(&wl));
                }
            }
            Ok(total.sqrt())
        }
        NormKind::E(k) => {
            if k > 4 {
                return Err(Error::UnsupportedOrder { order: k, max: 4 });
            }
            let wl = weight_field(WeightKind::WLambda, grids, params);
            let mut dk = f.clone();
            for _ in 0..k {
                dk = d_z(&dk);
            }
            let total = inner(f, f, Some(&wl)) + inner(&dk, &dk, Some(&wl));
            Ok((params.alpha() * total).sqrt())
        }
        NormKind::H2Eta => {
            let we = weight_field(WeightKind::WEta, grids, params);
            let wl = weight_field(WeightKind::WLambda, grids, params);
            let e = params.one_minus_eta();
            let dzf = d_z(f);
            let dtf = d_theta(f);
            let dzdtf = d_theta(&dzf);
            let d2tf = d_theta(&dtf);
            let d2zf = d2_z(f);
            let total = sq(e)
                * (inner(f, f, Some(&we))
                    + inner(&dzf, &dzf, Some(&we))
                    + inner(&dzdtf, &dzdtf, Some(&wl)))
                + inner(&dtf, &dtf, Some(&wl)) / sq(e)
                + inner(&d2tf, &d2tf, Some(&wl))
                + sq(sq(e)) * inner(&d2zf, &d2zf, Some(&we));
            Ok(total.sqrt())
        }
        NormKind::E2Eta => {
            let wl = weight_field(WeightKind::WLambda, grids, params);
            let e = params.one_minus_eta();
            let d2zf = d2_z(f);
            let total = params.alpha()
                * (sq(e) * inner(f, f, Some(&wl)) + sq(sq(e)) * inner(&d2zf, &d2zf, Some(&wl)));
            Ok(total.sqrt())
        }
        NormKind::HWz(n) => {
            if n > 4 {
                return Err(Error::UnsupportedOrder { order: n, max: 4 });
            }
            let wz = weight_radial(WeightKind::WZ, grids, params)?.broadcast();
            let table = derivative_table(f, n);
            let mut total = 0.0;
            for i in 0..=n {
                for j in 0..=(n - i) {
                    total += inner(&table[i][j], &table[i][j], Some(&wz));
                }
            }
            Ok(total.sqrt())
        }
    }
}

/// All norms of one field with the parameter snapshot, serializable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormSet {
    pub h_minus1: f64,
    pub h_k: [f64; 5],
    pub h_k_star: [f64; 5],
    pub e_2: f64,
    pub h2_eta: f64,
    pub e2_eta: f64,
    pub params: ModelParams,
}

impl NormSet {
    pub fn compute(f: &Field, params: &ModelParams) -> Result<Self> {
        let mut h_k = [0.0; 5];
        let mut h_k_star = [0.0; 5];
        for k in 0..=4 {
            h_k[k] = norm(f, NormKind::H(k), params)?;
            h_k_star[k] = norm(f, NormKind::HStar(k), params)?;
        }
        Ok(NormSet {
            h_minus1: norm(f, NormKind::HMinus1, params)?,
            h_k,
            h_k_star,
            e_2: norm(f, NormKind::E(2), params)?,
            h2_eta: norm(f, NormKind::H2Eta, params)?,
            e2_eta: norm(f, NormKind::E2Eta, params)?,
            params: *params,
        })
    }
}

/// Draw the admissible correction `g = g0 - c F*_beta` so that
/// `L^{-1}_{z,K}(g)(0) = 0`, returning `(g, c)`. `f_star_beta` must be the
/// fundamental profile at `gamma = beta` sampled on the same grids.
pub fn moment_correct(g0: &Field, f_star_beta: &Field, alpha: f64) -> Result<(Field, f64)> {
    let (_, m0) = l_inv_zk_with_zero(g0)?;
    // L^{-1}_{z,K}(F*_beta)(0) = 4 alpha / 3 in closed form.
    let c = m0 / (4.0 * alpha / 3.0);
    Ok((g0.sub(&f_star_beta.scale(c)), c))
}

/// Convenience: grids handle shared by inputs.
pub fn shared_grids(f: &Field) -> Arc<Grids> {
    f.grids.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grids, GridConfig};
    use crate::profiles::{gamma_star_raw, l_inv_gamma_star_raw, FundamentalProfile};

    fn grids() -> Arc<Grids> {
        make_grids(GridConfig::default()).unwrap()
    }

    fn params() -> ModelParams {
        ModelParams::new_unchecked(0.05, 1.0, 0.2, 0.0).unwrap()
    }

    #[test]
    fn l_inv_recovers_closed_form_for_gamma_star() {
        let g = grids();
        for &gam in &[0.5, 1.0, 1.5] {
            let f = RadialFn::from_fn(&g, |z| gamma_star_raw(z, gam));
            let (linv, at_zero) = l_inv_z_with_zero(&f).unwrap();
            let mut max_rel: f64 = 0.0;
            for (i, &z) in g.radial.nodes.iter().enumerate() {
                if (1e-4..=1e4).contains(&z) {
                    let exact = l_inv_gamma_star_raw(z, gam);
                    max_rel = max_rel.max(((linv.values[i] - exact) / exact).abs());
                }
            }
            assert!(max_rel < 5e-7, "gamma = {gam}: rel err {max_rel}");
            assert!((at_zero - 2.0).abs() < 1e-5, "gamma = {gam}: at_zero = {at_zero}");
        }
    }

    #[test]
    fn l_inv_of_inverse_power() {
        let g = grids();
        let f = RadialFn::from_fn(&g, |z| 1.0 / z);
        let linv = l_inv_z(&f).unwrap();
        for (i, &z) in g.radial.nodes.iter().enumerate() {
            if z >= 1e-4 {
                let rel = ((linv.values[i] - 1.0 / z) / (1.0 / z)).abs();
                assert!(rel < 1e-9, "z = {z}: rel {rel}");
            }
        }
    }

    #[test]
    fn l_inv_zero_input() {
        let g = grids();
        let f = RadialFn::zeros(&g);
        let linv = l_inv_z(&f).unwrap();
        assert_eq!(linv.max_abs(), 0.0);
    }

    #[test]
    fn l_inv_rejects_growing_tail() {
        let g = grids();
        let f = RadialFn::from_fn(&g, |z| 1.0 + z.sqrt());
        assert!(matches!(l_inv_z(&f), Err(Error::Tail(_))));
    }

    #[test]
    fn d_z_of_l_inv_is_minus_identity() {
        let g = grids();
        let f = RadialFn::from_fn(&g, |z| gamma_star_raw(z, 1.0));
        let linv = l_inv_z(&f).unwrap();
        let d = crate::grid::d_z_radial(&linv);
        let mut max_err: f64 = 0.0;
        for i in 4..g.radial.len() - 4 {
            max_err = max_err.max((d.values[i] + f.values[i]).abs());
        }
        assert!(max_err < 1e-6, "max err {max_err}");
    }

    #[test]
    fn bracket_k_of_separable_sine() {
        // <h(z) sin(2theta), K> = (4/15) h(z)
        let g = grids();
        let f = Field::separable(&g, |z| z / (1.0 + z * z), |t| (2.0 * t).sin());
        let b = bracket_k(&f);
        for (i, &z) in g.radial.nodes.iter().enumerate() {
            let exact = 4.0 / 15.0 * z / (1.0 + z * z);
            assert!((b.values[i] - exact).abs() < 1e-12 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn l_inv_zk_of_fundamental_profile() {
        let p = params();
        let g = grids();
        let prof = FundamentalProfile::for_params(&p).unwrap();
        let f = Field::from_fn(&g, |z, t| prof.eval(z, t));
        let linv = l_inv_zk(&f).unwrap();
        // closed form: (2 alpha / 3) * l_inv_gamma_star
        let mut max_rel: f64 = 0.0;
        for (i, &z) in g.radial.nodes.iter().enumerate() {
            if (1e-4..=1e4).contains(&z) {
                let exact = 2.0 * p.alpha() / 3.0 * l_inv_gamma_star_raw(z, p.gamma());
                max_rel = max_rel.max(((linv.values[i] - exact) / exact).abs());
            }
        }
        assert!(max_rel < 1e-6, "rel err {max_rel}");
    }

    #[test]
    fn g_tilde_kernel_reference_values() {
        let g = grids();
        let alpha = 0.05;
        // constant -> /25
        let c = RadialFn::from_fn(&g, |_| 3.0);
        let gt = g_tilde_kernel(&c, alpha).unwrap();
        for v in gt.values.iter() {
            assert!((v - 3.0 / 25.0).abs() < 1e-10);
        }
        // power law z^a -> z^a / (25 + 5 alpha a)
        let a = 0.7;
        let f = RadialFn::from_fn(&g, |z| z.powf(a));
        let gt = g_tilde_kernel(&f, alpha).unwrap();
        let mut max_rel: f64 = 0.0;
        for (i, &z) in g.radial.nodes.iter().enumerate() {
            let exact = z.powf(a) / (25.0 + 5.0 * alpha * a);
            max_rel = max_rel.max(((gt.values[i] - exact) / exact).abs());
        }
        assert!(max_rel < 1e-8, "rel err {max_rel}");
        // zero -> zero
        let z0 = RadialFn::zeros(&g);
        assert_eq!(g_tilde_kernel(&z0, alpha).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn norms_are_homogeneous_and_zero_on_zero() {
        let p = params();
        let g = grids();
        let f = Field::separable(
            &g,
            |z| z * z * (-z).exp(),
            |t| (2.0 * t).sin().powf(1.0 + p.lambda() / 2.0),
        );
        let zero = Field::zeros(&g);
        for kind in [
            NormKind::HMinus1,
            NormKind::H(2),
            NormKind::HStar(2),
            NormKind::E(2),
            NormKind::H2Eta,
            NormKind::E2Eta,
            NormKind::HWz(1),
        ] {
            let n0 = norm(&zero, kind, &p).unwrap();
            assert_eq!(n0, 0.0, "{kind:?} of 0");
            let n1 = norm(&f, kind, &p).unwrap();
            let n3 = norm(&f.scale(-3.0), kind, &p).unwrap();
            assert!(
                (n3 - 3.0 * n1).abs() < 1e-12 * n1.max(1.0),
                "{kind:?} homogeneity: {n3} vs 3*{n1}"
            );
        }
    }

    #[test]
    fn h_k_norms_monotone_in_k() {
        let p = params();
        let g = grids();
        let f = Field::separable(
            &g,
            |z| z * z * (-z).exp(),
            |t| (2.0 * t).sin().powf(1.0 + p.lambda() / 2.0),
        );
        let mut prev = 0.0;
        for k in 0..=4 {
            let n = norm(&f, NormKind::H(k), &p).unwrap();
            assert!(n >= prev, "H^{k} = {n} < H^{} = {prev}", k - 1);
            prev = n;
        }
    }

    #[test]
    fn moment_correction_zeroes_the_boundary_integral() {
        let p = params();
        let g = grids();
        let prof = FundamentalProfile::new(p.beta(), p.alpha()).unwrap();
        let fb = Field::from_fn(&g, |z, t| prof.eval(z, t));
        let g0 = Field::separable(
            &g,
            |z| z.powf(3.0) * (-z).exp(),
            |t| (2.0 * t).sin().powf(1.0 + p.lambda() / 2.0),
        );
        let (gc, _) = moment_correct(&g0, &fb, p.alpha()).unwrap();
        let (_, m0) = l_inv_zk_with_zero(&gc).unwrap();
        let scale = l_inv_zk_with_zero(&g0).unwrap().1.abs();
        assert!(m0.abs() < 1e-10 * scale.max(1e-30), "moment {m0}");
    }
}

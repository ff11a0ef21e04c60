//! Quadrature and differentiation kernels: Gauss-Legendre rules,
//! barycentric differentiation on panel nodes, and high-order cumulative
//! integration on uniform grids.

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Laguerre nodes and weights for `int_0^inf e^{-u} f(u) du`.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut x = 0.0;
    for i in 0..n {
        // Stroud-Secrest style initial guesses.
        x = if i == 0 {
            3.0 / (1.0 + 2.4 * n as f64)
        } else if i == 1 {
            nodes[0] + 15.0 / (1.0 + 2.5 * n as f64)
        } else {
            let step = (1.0 + 2.55 * (i as f64 - 1.0)) / (1.9 * (i as f64 - 1.0));
            nodes[i - 1] + step * (nodes[i - 1] - nodes[i - 2])
        }
        .max(x * 1.0000001);
        let mut dp = 0.0;
        for _ in 0..200 {
            // Laguerre L_n(x) and derivative via recurrence.
            let mut p0 = 1.0;
            let mut p1 = 1.0 - x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0 - x) * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (p1 - p0) / x;
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-14 * (1.0 + x.abs()) {
                break;
            }
        }
        nodes[i] = x;
        // w_i = x_i / ((n+1)^2 L_{n+1}(x_i)^2); use derivative form instead.
        weights[i] = 1.0 / (x * dp * dp);
    }
    (nodes, weights)
}

/// A contiguous quadrature panel: GL nodes mapped to `[a, b]`.
#[derive(Debug, Clone)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Panel {
    pub fn new(a: f64, b: f64, order: usize) -> Self {
        let (xs, ws) = gauss_legendre(order);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Panel {
            a,
            b,
            nodes: xs.iter().map(|x| mid + half * x).collect(),
            weights: ws.iter().map(|w| w * half).collect(),
        }
    }
}

/// Barycentric interpolation weights for arbitrary distinct nodes.
pub fn barycentric_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // Rescale to O(1) to avoid under/overflow in the products.
    let span = xs[n - 1] - xs[0];
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] *= (xs[i] - xs[j]) / span;
            }
        }
        w[i] = 1.0 / w[i];
    }
    w
}

/// Dense differentiation matrix on the given nodes (derivative of the
/// interpolating polynomial, evaluated at the nodes).
pub fn differentiation_matrix(xs: &[f64]) -> Vec<Vec<f64>> {
    let n = xs.len();
    let w = barycentric_weights(xs);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                d[i][j] = (w[j] / w[i]) / (xs[i] - xs[j]);
                diag -= d[i][j];
            }
        }
        d[i][i] = diag;
    }
    d
}

/// Coefficients `c` of the interpolatory rule
/// `int_{x_0}^{x_1} p(x) dx = h * sum_k c[k] f(t_k)` where `p` interpolates
/// `f` at offsets `t_k` (in units of `h`). Solved from the moment equations.
fn interpolatory_rule(offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    // Vandermonde^T c = moments of x^k over [0,1].
    let mut a = vec![vec![0.0; n + 1]; n];
    for (k, row) in a.iter_mut().enumerate() {
        for (j, &t) in offsets.iter().enumerate() {
            row[j] = t.powi(k as i32);
        }
        row[n] = 1.0 / (k as f64 + 1.0);
    }
    // Gaussian elimination with partial pivoting on the small system.
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

/// Cumulative integral on a uniform grid, integrating *from the right end
/// inward*: returns `C` with `C[i] = int_{x_i}^{x_{n-1}} f dx`, using a
/// sliding 6-point (degree-5) interpolatory rule; global order 6.
pub fn cumulative_right_uniform(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 6, "cumulative integration needs at least 6 nodes");
    // Rule for interval [x_i, x_{i+1}] with stencil offsets relative to x_i.
    // Interior stencil {-2,-1,0,1,2,3}; shifted near the ends.
    let interior = interpolatory_rule(&[-2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    let left1 = interpolatory_rule(&[-1.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
    let left0 = interpolatory_rule(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    let right1 = interpolatory_rule(&[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0]);
    let right0 = interpolatory_rule(&[-4.0, -3.0, -2.0, -1.0, 0.0, 1.0]);

    let mut c = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let (coeffs, base): (&[f64], usize) = if i == 0 {
            (&left0, 0)
        } else if i == 1 {
            (&left1, 0)
        } else if i == n - 2 {
            (&right0, i - 4)
        } else if i == n - 3 {
            (&right1, i - 3)
        } else {
            (&interior, i - 2)
        };
        let mut s = 0.0;
        for (k, &w) in coeffs.iter().enumerate() {
            s += w * f[base + k];
        }
        c[i] = c[i + 1] + h * s;
    }
    c
}

/// Total integral on a uniform grid by the trapezoidal rule. For integrands
/// decaying at both ends (the usual case on the log-radial grid) this is
/// spectrally accurate.
pub fn trapezoid_uniform(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    let mut s = 0.5 * (f[0] + f[n - 1]);
    for v in &f[1..n - 1] {
        s += v;
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        // degree 15 is exact for 8 nodes
        let int: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert!((int - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = ws.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gl_high_order_nodes_are_sane() {
        let (xs, ws) = gauss_legendre(64);
        assert!(xs.windows(2).all(|p| p[0] < p[1]));
        assert!(ws.iter().all(|&w| w > 0.0));
        let int: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (3.0 * x).cos()).sum();
        let exact = 2.0 * 3.0_f64.sin() / 3.0;
        assert!((int - exact).abs() < 1e-14);
    }

    #[test]
    fn gauss_laguerre_moments() {
        let (xs, ws) = gauss_laguerre(12);
        assert!(xs.windows(2).all(|p| p[0] < p[1]));
        // int e^{-u} u^k du = k!
        for k in 0..6u32 {
            let int: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(k as i32)).sum();
            let exact: f64 = (1..=k).map(|j| j as f64).product();
            assert!(
                (int - exact).abs() < 1e-10 * exact.max(1.0),
                "k = {k}: {int} vs {exact}"
            );
        }
    }

    #[test]
    fn differentiation_matrix_is_exact_on_polynomials() {
        let (xs, _) = gauss_legendre(10);
        let d = differentiation_matrix(&xs);
        for (i, row) in d.iter().enumerate() {
            let der: f64 = row
                .iter()
                .zip(&xs)
                .map(|(dij, x)| dij * (x.powi(5) - 2.0 * x.powi(2)))
                .sum();
            let exact = 5.0 * xs[i].powi(4) - 4.0 * xs[i];
            assert!((der - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_integration_is_high_order() {
        // f = exp(-x) on [0, 10]; C[i] = exp(-x_i) - exp(-10).
        let errs: Vec<f64> = [200usize, 400]
            .iter()
            .map(|&n| {
                let h = 10.0 / (n - 1) as f64;
                let f: Vec<f64> = (0..n).map(|i| (-(i as f64) * h).exp()).collect();
                let c = cumulative_right_uniform(&f, h);
                (0..n)
                    .map(|i| {
                        let exact = (-(i as f64) * h).exp() - (-10.0f64).exp();
                        (c[i] - exact).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] < 1e-9);
        // order ~ 6: halving h gains ~ 2^6
        assert!(errs[0] / errs[1] > 30.0);
    }
}

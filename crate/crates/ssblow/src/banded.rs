//! Banded LU factorization with partial pivoting (LAPACK `gbtrf`-style
//! storage) for the block-banded elliptic system and the implicit
//! relaxation drift.

use crate::error::{Error, Result};

/// A general band matrix with `kl` sub- and `ku` super-diagonals, stored
/// column-wise with room for fill-in from row pivoting.
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// `(2 kl + ku + 1) x n`; entry (i, j) lives at row `kl + ku + i - j`.
    data: Vec<f64>,
    ld: usize,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; ld * n],
            ld,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        let r = self.kl + self.ku + i - j;
        j * self.ld + r
    }

    /// Add to entry (i, j); panics outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(
            j + self.kl >= i && i + self.ku >= j,
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || i + self.kl + self.ku < j {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// Factor in place; returns the pivot vector. Fails on exact/near
    /// singularity with a condition hint.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let mut piv = vec![0usize; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for j in 0..n {
            // pivot search within the column's sub-diagonal window
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut pmax = self.data[self.idx(j, j)].abs();
            for i in (j + 1)..=last {
                let v = self.data[self.idx(i, j)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(Error::Solver(format!("singular band matrix at column {j}")));
            }
            min_pivot = min_pivot.min(pmax);
            max_pivot = max_pivot.max(pmax);
            piv[j] = p;
            // swap rows j and p across the affected columns
            if p != j {
                let hi = (j + kl + ku).min(n - 1);
                for c in j..=hi {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let djj = self.data[self.idx(j, j)];
            for i in (j + 1)..=last {
                let k = self.idx(i, j);
                let m = self.data[k] / djj;
                self.data[k] = m;
                let hi = (j + kl + ku).min(n - 1);
                for c in (j + 1)..=hi {
                    let a = self.idx(i, c);
                    let b = self.idx(j, c);
                    self.data[a] -= m * self.data[b];
                }
            }
        }
        if min_pivot / max_pivot < 1e-300 {
            return Err(Error::Solver(format!(
                "band matrix numerically singular (pivot ratio {:.2e})",
                min_pivot / max_pivot
            )));
        }
        Ok(BandLu {
            mat: self,
            piv,
            pivot_ratio: min_pivot / max_pivot,
        })
    }
}

/// Factored band matrix.
pub struct BandLu {
    mat: BandMatrix,
    piv: Vec<usize>,
    /// min/max pivot magnitude ratio, a cheap conditioning hint.
    pub pivot_ratio: f64,
}

impl BandLu {
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let ku = self.mat.ku;
        assert_eq!(rhs.len(), n);
        // forward substitution with pivoting
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                rhs.swap(j, p);
            }
            let last = (j + kl).min(n - 1);
            let xj = rhs[j];
            for i in (j + 1)..=last {
                rhs[i] -= self.mat.data[self.mat.idx(i, j)] * xj;
            }
        }
        // back substitution
        for j in (0..n).rev() {
            let mut s = rhs[j];
            let hi = (j + kl + ku).min(n - 1);
            for c in (j + 1)..=hi {
                s -= self.mat.data[self.mat.idx(j, c)] * rhs[c];
            }
            rhs[j] = s / self.mat.data[self.mat.idx(j, j)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination oracle.
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut x = b.to_vec();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            m.swap(c, p);
            x.swap(c, p);
            let d = m[c][c];
            for j in c..n {
                m[c][j] /= d;
            }
            x[c] /= d;
            for i in 0..n {
                if i != c && m[i][c] != 0.0 {
                    let f = m[i][c];
                    for j in c..n {
                        m[i][j] -= f * m[c][j];
                    }
                    x[i] -= f * x[c];
                }
            }
        }
        x
    }

    #[test]
    fn matches_dense_oracle_on_random_band() {
        let n = 60;
        let (kl, ku) = (5, 3);
        // deterministic pseudo-random fill
        let mut seed = 42u64;
        let mut rng = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) as f64 / (1u64 << 31) as f64 - 1.0
        };
        let mut band = BandMatrix::new(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if j + kl >= i && i + ku >= j {
                    let v = rng() + if i == j { 4.0 } else { 0.0 };
                    band.set(i, j, v);
                    dense[i][j] = v;
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let lu = band.factor().unwrap();
        let mut x = b.clone();
        lu.solve(&mut x);
        let y = dense_solve(&dense, &b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut band = BandMatrix::new(4, 1, 1);
        band.set(0, 0, 1.0);
        band.set(1, 1, 1.0);
        band.set(2, 2, 0.0);
        band.set(3, 3, 1.0);
        assert!(matches!(band.factor(), Err(Error::Solver(_))));
    }
}

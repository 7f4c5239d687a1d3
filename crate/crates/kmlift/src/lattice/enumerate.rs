//! Fincke–Pohst enumeration of integer points in an ellipsoid
//! (x − c)ᵀ Q (x − c) ≤ R for a positive-definite real Q.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Points within this slack of the boundary are included; the brute-force
/// oracles in the tests use the same rule.
pub fn boundary_slack(bound: f64) -> f64 {
    1e-9 * bound.max(1.0)
}

#[derive(Clone, Debug)]
pub struct Ellipsoid {
    n: usize,
    r2: Vec<f64>,
    // mu[i * n + j] = r_ij / r_ii for j > i, with Q = Rᵀ R
    mu: Vec<f64>,
    center: Vec<f64>,
}

impl Ellipsoid {
    pub fn new(gram: &DMatrix<f64>, center: Option<&[f64]>) -> Result<Self> {
        let n = gram.nrows();
        if gram.ncols() != n {
            return Err(Error::Dimension { expected: n, got: gram.ncols() });
        }
        let center = match center {
            Some(c) if c.len() != n => return Err(Error::Dimension { expected: n, got: c.len() }),
            Some(c) => c.to_vec(),
            None => vec![0.0; n],
        };
        let chol = nalgebra::Cholesky::new(gram.clone()).ok_or(Error::NotPositiveDefinite)?;
        let l = chol.l();
        let mut r2 = vec![0.0; n];
        let mut mu = vec![0.0; n * n];
        for i in 0..n {
            let rii = l[(i, i)];
            if !(rii > 0.0) || !rii.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            r2[i] = rii * rii;
            for j in i + 1..n {
                mu[i * n + j] = l[(j, i)] / rii;
            }
        }
        Ok(Ellipsoid { n, r2, mu, center })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn level_center(&self, i: usize, coords: &[i64]) -> f64 {
        let mut c = self.center[i];
        for j in i + 1..self.n {
            c -= self.mu[i * self.n + j] * (coords[j] as f64 - self.center[j]);
        }
        c
    }

    /// Admissible values of the last coordinate.
    pub fn top_values(&self, bound: f64) -> Vec<i64> {
        if self.n == 0 {
            return Vec::new();
        }
        let i = self.n - 1;
        let tol = boundary_slack(bound);
        let c = self.center[i];
        let rad = ((bound + tol).max(0.0) / self.r2[i]).sqrt();
        ((c - rad).ceil() as i64..=(c + rad).floor() as i64).collect()
    }

    /// Visit every point with norm ≤ bound whose last coordinate equals `top`.
    /// `image` (m × n) and `offset` (length m) make the callback also receive
    /// offset + image·x, maintained incrementally along the search.
    pub fn for_each_with_top<F>(&self, top: i64, bound: f64, image: Option<(&DMatrix<f64>, &[f64])>, mut f: F)
    where
        F: FnMut(&[i64], f64, &[f64]),
    {
        let n = self.n;
        let (m, mat, off) = match image {
            Some((mat, off)) => (mat.nrows(), Some(mat), off.to_vec()),
            None => (0, None, Vec::new()),
        };
        let mut coords = vec![0i64; n];
        // partial[i] = offset + Σ_{j ≥ i} image_j x_j, stored per level
        let mut partial = vec![0.0; (n + 1) * m];
        partial[n * m..].copy_from_slice(&off);
        let tol = boundary_slack(bound);
        if n == 0 {
            f(&coords, 0.0, &partial);
            return;
        }
        let i = n - 1;
        let d = top as f64 - self.center[i];
        let used = self.r2[i] * d * d;
        if used > bound + tol {
            return;
        }
        coords[i] = top;
        if let Some(mat) = mat {
            for r in 0..m {
                partial[i * m + r] = partial[(i + 1) * m + r] + mat[(r, i)] * top as f64;
            }
        }
        if i == 0 {
            f(&coords, used, &partial[..m]);
            return;
        }
        self.recurse(i - 1, used, bound + tol, &mut coords, &mut partial, m, mat, &mut f);
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F>(
        &self,
        i: usize,
        acc: f64,
        limit: f64,
        coords: &mut [i64],
        partial: &mut [f64],
        m: usize,
        mat: Option<&DMatrix<f64>>,
        f: &mut F,
    ) where
        F: FnMut(&[i64], f64, &[f64]),
    {
        let c = self.level_center(i, coords);
        let budget = limit - acc;
        if budget < 0.0 {
            return;
        }
        let rad = (budget / self.r2[i]).sqrt();
        let lo = (c - rad).ceil() as i64;
        let hi = (c + rad).floor() as i64;
        for x in lo..=hi {
            let d = x as f64 - c;
            let norm = acc + self.r2[i] * d * d;
            if norm > limit {
                continue;
            }
            coords[i] = x;
            if let Some(mat) = mat {
                let (lower, upper) = partial.split_at_mut((i + 1) * m);
                for r in 0..m {
                    lower[i * m + r] = upper[r] + mat[(r, i)] * x as f64;
                }
            }
            if i == 0 {
                f(coords, norm, &partial[..m]);
            } else {
                self.recurse(i - 1, norm, limit, coords, partial, m, mat, f);
            }
        }
        coords[i] = 0;
    }

    pub fn for_each<F: FnMut(&[i64], f64)>(&self, bound: f64, mut f: F) {
        for top in self.top_values(bound) {
            self.for_each_with_top(top, bound, None, |x, norm, _| f(x, norm));
        }
    }

    /// All points with norm ≤ bound, sorted lexicographically.
    pub fn points(&self, bound: f64) -> Vec<Vec<i64>> {
        let tops = self.top_values(bound);
        let chunks = crate::par::map_ordered(&tops, |&top| {
            let mut out = Vec::new();
            self.for_each_with_top(top, bound, None, |x, _, _| out.push(x.to_vec()));
            out
        });
        let mut all: Vec<Vec<i64>> = chunks.into_iter().flatten().collect();
        all.sort();
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_counts_sum_of_squares() {
        // points of Z^2 with x² + y² ≤ 5: 21
        let e = Ellipsoid::new(&DMatrix::identity(2, 2), None).unwrap();
        assert_eq!(e.points(5.0).len(), 21);
        assert_eq!(e.points(0.0), vec![vec![0, 0]]);
    }

    #[test]
    fn centered_ellipsoid() {
        let e = Ellipsoid::new(&DMatrix::identity(1, 1), Some(&[0.5])).unwrap();
        assert_eq!(e.points(0.25), vec![vec![0], vec![1]]);
    }

    #[test]
    fn image_is_tracked() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let a = DMatrix::from_row_slice(1, 2, &[3.0, -1.0]);
        let e = Ellipsoid::new(&q, None).unwrap();
        for top in e.top_values(6.0) {
            e.for_each_with_top(top, 6.0, Some((&a, &[0.5])), |x, norm, img| {
                let direct = 2.0 * (x[0] * x[0] + x[0] * x[1] + x[1] * x[1]) as f64;
                assert!((norm - direct).abs() < 1e-12);
                assert_eq!(img[0], 0.5 + 3.0 * x[0] as f64 - x[1] as f64);
            });
        }
    }

    #[test]
    fn rejects_indefinite() {
        let q = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(Ellipsoid::new(&q, None).unwrap_err(), Error::NotPositiveDefinite);
    }
}

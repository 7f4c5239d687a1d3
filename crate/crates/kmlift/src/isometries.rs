//! Exact isometries of R^{b,2} built from elementary generators, with
//! entries in any [`Coeff`] field (Q(√2) for exact work).
//!
//! Indices are 1-based e-basis labels: e_1..e_b positive, e_{b+1}, e_{b+2}
//! negative.

use crate::error::{Error, Result};
use crate::exact::Coeff;
use crate::geometry::{Isometry, GEOMETRY_TOLERANCE};

pub type ExactMatrix<C> = Vec<Vec<C>>;

pub fn identity<C: Coeff>(n: usize) -> ExactMatrix<C> {
    (0..n).map(|i| (0..n).map(|j| if i == j { C::one() } else { C::zero() }).collect()).collect()
}

pub fn mat_mul<C: Coeff>(a: &ExactMatrix<C>, b: &ExactMatrix<C>) -> ExactMatrix<C> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).fold(C::zero(), |s, k| if a[i][k].is_zero() { s } else { s.add(&a[i][k].mul(&b[k][j])) }))
                .collect()
        })
        .collect()
}

pub fn to_isometry<C: Coeff>(m: &ExactMatrix<C>) -> Result<Isometry> {
    let rows: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|c| c.to_f64()).collect()).collect();
    Isometry::from_rows(&rows, GEOMETRY_TOLERANCE)
}

fn check(n: usize, i: usize) -> Result<usize> {
    if i == 0 || i > n {
        return Err(Error::Index { index: i, max: n });
    }
    Ok(i - 1)
}

/// Exchange e_i ↔ e_j (same sign class).
pub fn swap<C: Coeff>(b: usize, i: usize, j: usize) -> Result<ExactMatrix<C>> {
    let n = b + 2;
    let (a, c) = (check(n, i)?, check(n, j)?);
    if (a < b) != (c < b) {
        return Err(Error::Invalid("swap must stay inside one sign class".into()));
    }
    let mut m = identity::<C>(n);
    m[a][a] = C::zero();
    m[c][c] = C::zero();
    m[a][c] = C::one();
    m[c][a] = C::one();
    Ok(m)
}

/// e_i ↦ (e_i + e_j)/√2, e_j ↦ (e_i − e_j)/√2 (same sign class).
pub fn rotation45<C: Coeff>(b: usize, i: usize, j: usize) -> Result<ExactMatrix<C>> {
    let n = b + 2;
    let (a, c) = (check(n, i)?, check(n, j)?);
    if a == c || (a < b) != (c < b) {
        return Err(Error::Invalid("rotation needs two distinct indices of one sign class".into()));
    }
    let s = C::one().div(&C::sqrt2());
    let mut m = identity::<C>(n);
    m[a][a] = s.clone();
    m[c][a] = s.clone();
    m[a][c] = s.clone();
    m[c][c] = s.neg();
    Ok(m)
}

/// Hyperbolic rotation in the (e_i, e_j) plane, e_i positive and e_j
/// negative, with cosh = ch and sinh = sh (ch² − sh² = 1).
pub fn boost<C: Coeff>(b: usize, i: usize, j: usize, ch: C, sh: C) -> Result<ExactMatrix<C>> {
    let n = b + 2;
    let (a, c) = (check(n, i)?, check(n, j)?);
    if !(a < b && c >= b) {
        return Err(Error::Invalid("boost needs a positive and a negative index".into()));
    }
    if !ch.mul(&ch).sub(&sh.mul(&sh)).sub(&C::one()).is_zero() {
        return Err(Error::Invalid("cosh² − sinh² ≠ 1".into()));
    }
    let mut m = identity::<C>(n);
    m[a][a] = ch.clone();
    m[c][c] = ch;
    m[a][c] = sh.clone();
    m[c][a] = sh;
    Ok(m)
}

/// e_α ↦ (e_α + e_β)/√2, e_b ↦ (e_α − e_β)/√2, e_β ↦ e_b, fixing the rest.
pub fn rotation_example<C: Coeff>(b: usize, alpha: usize, beta: usize) -> Result<ExactMatrix<C>> {
    let n = b + 2;
    let (a, c) = (check(b, alpha)?, check(b, beta)?);
    if a == c || alpha == b || beta == b {
        return Err(Error::Invalid("α, β must be distinct and below b".into()));
    }
    let s = C::one().div(&C::sqrt2());
    let last = b - 1;
    let mut m = identity::<C>(n);
    for col in [a, c, last] {
        for row in 0..n {
            m[row][col] = C::zero();
        }
    }
    m[a][a] = s.clone();
    m[c][a] = s.clone();
    m[a][last] = s.clone();
    m[c][last] = s.neg();
    m[last][c] = C::one();
    Ok(m)
}

/// Exchange e_α ↔ e_b and e_{b+1} ↔ e_{b+2}; fixes z_0.
pub fn swap_matrix<C: Coeff>(alpha: usize, b: usize) -> Result<ExactMatrix<C>> {
    if alpha == 0 || alpha >= b {
        return Err(Error::Index { index: alpha, max: b - 1 });
    }
    let m = swap::<C>(b, alpha, b)?;
    Ok(mat_mul(&m, &swap::<C>(b, b + 1, b + 2)?))
}

/// Product of generators chosen by the entries of `word`; a deterministic
/// way to produce varied exact isometries from random integers.
pub fn isometry_from_word<C: Coeff>(b: usize, word: &[u64]) -> ExactMatrix<C> {
    let n = b + 2;
    let mut m = identity::<C>(n);
    for &w in word {
        let kind = w % 4;
        let r = (w / 4) as usize;
        let gen = match kind {
            0 => {
                let i = 1 + r % b;
                let j = 1 + (r / b + i) % b;
                if i == j {
                    continue;
                }
                swap::<C>(b, i, j)
            }
            1 => {
                let i = 1 + r % b;
                let j = 1 + (i + 1 + (r / b) % (b - 1)) % b;
                if j == i || j > b {
                    continue;
                }
                rotation45::<C>(b, i, j)
            }
            2 => {
                let i = 1 + r % b;
                let j = b + 1 + (r / b) % 2;
                if (r / (2 * b)) % 2 == 0 {
                    boost(b, i, j, C::from_ratio(5, 3), C::from_ratio(4, 3))
                } else {
                    boost(b, i, j, C::sqrt2(), C::from_ratio(-1, 1))
                }
            }
            _ => rotation45::<C>(b, b + 1, b + 2),
        };
        m = mat_mul(&m, &gen.expect("indices constructed in range"));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::QSqrt2;

    fn is_isometry(m: &ExactMatrix<QSqrt2>, b: usize) -> bool {
        let n = b + 2;
        (0..n).all(|i| {
            (0..n).all(|j| {
                let mut s = QSqrt2::zero();
                for k in 0..n {
                    let t = m[k][i].mul(&m[k][j]);
                    s = if k < b { s.add(&t) } else { s.sub(&t) };
                }
                let want = if i != j { QSqrt2::zero() } else if i < b { QSqrt2::one() } else { QSqrt2::int(-1) };
                s == want
            })
        })
    }

    #[test]
    fn generators_are_isometries() {
        let b = 6;
        assert!(is_isometry(&swap(b, 1, 4).unwrap(), b));
        assert!(is_isometry(&rotation45(b, 2, 5).unwrap(), b));
        assert!(is_isometry(&boost(b, 3, 8, QSqrt2::sqrt2(), QSqrt2::int(1)).unwrap(), b));
        assert!(is_isometry(&rotation_example(b, 1, 2).unwrap(), b));
        assert!(is_isometry(&swap_matrix(3, b).unwrap(), b));
        for seed in 0..20u64 {
            let word: Vec<u64> = (0..6).map(|k| seed * 7919 + k * 104729 % 997).collect();
            assert!(is_isometry(&isometry_from_word(b, &word), b));
        }
    }

    #[test]
    fn swap_is_involution() {
        let s = swap_matrix::<QSqrt2>(2, 10).unwrap();
        assert_eq!(mat_mul(&s, &s), identity(12));
        assert!(swap_matrix::<QSqrt2>(10, 10).is_err());
    }

    #[test]
    fn bad_generators_rejected() {
        assert!(boost::<QSqrt2>(4, 1, 5, QSqrt2::int(2), QSqrt2::int(1)).is_err());
        assert!(swap::<QSqrt2>(4, 1, 5).is_err());
        assert!(rotation45::<QSqrt2>(4, 2, 2).is_err());
    }
}

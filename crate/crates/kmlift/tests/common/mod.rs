#![allow(dead_code)]

use std::f64::consts::PI;

use kmlift::geometry::TubePoint;
use kmlift::polynomials::{heat_operator_at, MultiPoly};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

/// A real basis B (columns) with Bᵀ J B = gram, positive coordinates first.
pub fn real_basis(gram: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let n = gram.nrows();
    let eig = gram.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let p = order.iter().filter(|&&i| eig.eigenvalues[i] > 0.0).count();
    let b = DMatrix::from_fn(n, n, |r, c| {
        let k = order[r];
        eig.eigenvalues[k].abs().sqrt() * eig.eigenvectors[(c, k)]
    });
    (b, p)
}

/// exp(A J) for a small random J-antisymmetric A, via a truncated series.
pub fn random_isometry(p: usize, q: usize, scale: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let n = p + q;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = scale * rng.gen_range(-1.0..1.0);
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
    let jm = DMatrix::from_fn(n, n, |i, j| if i != j { 0.0 } else if i < p { 1.0 } else { -1.0 });
    let x = &a * &jm;
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..40 {
        term = &term * &x / k as f64;
        sum += &term;
    }
    sum
}

/// Σ over the box |c_i| ≤ half of heat(P)(x) e(τ q(x₊) + τ̄ q(x₋) − (c + β/2, α)),
/// with x = map (c + β).
#[allow(clippy::too_many_arguments)]
pub fn brute_theta(
    gram: &DMatrix<f64>,
    map: &DMatrix<f64>,
    p_amb: usize,
    tau: Complex64,
    alpha: &[f64],
    beta: &[f64],
    poly: &MultiPoly<f64>,
    half: i64,
) -> Complex64 {
    let n = gram.nrows();
    let heat = heat_operator_at(poly, tau.im);
    let mut c = vec![-half; n];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let v: Vec<f64> = c.iter().zip(beta).map(|(&a, b)| a as f64 + b).collect();
        let x: Vec<f64> = (0..map.nrows()).map(|i| (0..n).map(|j| map[(i, j)] * v[j]).sum()).collect();
        let qp: f64 = 0.5 * x[..p_amb].iter().map(|t| t * t).sum::<f64>();
        let qm: f64 = -0.5 * x[p_amb..].iter().map(|t| t * t).sum::<f64>();
        let mut pair = 0.0;
        for i in 0..n {
            for j in 0..n {
                pair += (c[i] as f64 + 0.5 * beta[i]) * gram[(i, j)] * alpha[j];
            }
        }
        let arg = tau * qp + tau.conj() * qm - pair;
        total += heat.eval(&x) * (Complex64::new(0.0, 2.0 * PI) * arg).exp();
        let mut k = 0;
        loop {
            if k == n {
                return total;
            }
            c[k] += 1;
            if c[k] <= half {
                break;
            }
            c[k] = -half;
            k += 1;
        }
    }
}

pub fn random_tube_point(b: usize, rng: &mut impl Rng) -> TubePoint {
    let x: Vec<f64> = (0..b).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut y: Vec<f64> = (0..b).map(|_| rng.gen_range(-0.2..0.2)).collect();
    y[0] = rng.gen_range(0.6..1.5);
    y[b - 1] = -rng.gen_range(0.6..1.5);
    TubePoint::new(x, y).unwrap()
}

pub fn random_poly(nvars: usize, degree: u32, rng: &mut impl Rng) -> MultiPoly<f64> {
    let mut p = MultiPoly::zero(nvars);
    for _ in 0..3 {
        let mut ex = vec![0u32; nvars];
        for _ in 0..degree {
            ex[rng.gen_range(0..nvars)] += 1;
        }
        p = p.add(&MultiPoly::from_terms(nvars, [(ex, rng.gen_range(-1.0..1.0))]));
    }
    p
}

/// Small Gram matrices of mixed signature used by the box-sum oracles.
pub fn small_lattices() -> Vec<Vec<Vec<i64>>> {
    vec![
        vec![vec![0, 1], vec![1, 0]],
        vec![vec![2, 1], vec![1, 2]],
        vec![vec![2, 1, 0], vec![1, 2, 0], vec![0, 0, -2]],
        vec![vec![0, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 1], vec![0, 0, 1, 0]],
        vec![vec![4, 1, 0, 0], vec![1, 2, 1, 0], vec![0, 1, -2, 0], vec![0, 0, 0, 2]],
    ]
}

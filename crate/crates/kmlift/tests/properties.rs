mod common;

use std::collections::BTreeSet;

use kmlift::exact::{Coeff, QSqrt2};
use kmlift::geometry::translation_matrix;
use kmlift::lattice::*;
use kmlift::polynomials::{heat_operator_at, MultiPoly};
use kmlift::quad::{adaptive_log, AdaptiveConfig};
use kmlift::special::bessel_integral;
use kmlift::theta::{coprime_pairs, Sl2};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

fn box_search(gram: &DMatrix<f64>, bound: f64, half: i64) -> BTreeSet<Vec<i64>> {
    let n = gram.nrows();
    let mut out = BTreeSet::new();
    let total = (2 * half + 1).pow(n as u32);
    for idx in 0..total {
        let mut r = idx;
        let c: Vec<i64> = (0..n)
            .map(|_| {
                let v = r % (2 * half + 1) - half;
                r /= 2 * half + 1;
                v
            })
            .collect();
        let v: f64 = (0..n).map(|i| (0..n).map(|j| c[i] as f64 * gram[(i, j)] * c[j] as f64).sum::<f64>()).sum();
        if v <= bound + enumerate::boundary_slack(bound) {
            out.insert(c);
        }
    }
    out
}

/// Integer Gram matrices made positive definite by diagonal dominance.
fn pd_gram() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..=4).prop_flat_map(|n| {
        proptest::collection::vec(-2i64..=2, n * n).prop_map(move |v| {
            let mut g = DMatrix::from_fn(n, n, |i, j| if i < j { v[i * n + j] } else { v[j * n + i] } as f64);
            for i in 0..n {
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| g[(i, j)].abs()).sum();
                g[(i, i)] = off + 1.0 + (v[i * n + i].abs() as f64);
            }
            g
        })
    })
}

fn q_rat() -> impl Strategy<Value = QSqrt2> {
    (-20i64..=20, 1i64..=9, -20i64..=20, 1i64..=9).prop_map(|(a, b, c, d)| QSqrt2::from_parts(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn enumeration_equals_box(g in pd_gram(), bound in 0.0f64..10.0) {
        // the smallest eigenvalue is at least 1, so |c_i| ≤ √bound
        let half = bound.sqrt().floor() as i64;
        let found: BTreeSet<Vec<i64>> = enumerate_majorant(&Majorant::new(g.clone()).unwrap(), bound)
            .unwrap().into_iter().map(|v| v.coords).collect();
        prop_assert_eq!(found.len() % 2, 1);
        prop_assert_eq!(found, box_search(&g, bound, half));
    }

    #[test]
    fn divisors_match_brute_force(c in proptest::collection::vec(-60i64..=60, 1..5)) {
        prop_assume!(c.iter().any(|&v| v != 0));
        let d = vector_divisors(&LatticeVector::new(c.clone())).unwrap();
        let brute: Vec<u64> = (1..=60u64).filter(|&t| c.iter().all(|&v| v % t as i64 == 0)).collect();
        prop_assert_eq!(d, brute);
    }

    #[test]
    fn represented_norms(n in 1i64..10_000) {
        let s = signature_b2_lattice(10).unwrap();
        prop_assert_eq!(s.k.quadratic_form(&s.represent_integer(n).unwrap()).unwrap(), Rational64::from_integer(n));
    }

    #[test]
    fn qsqrt2_field(a in q_rat(), b in q_rat(), c in q_rat()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        if !b.is_zero() {
            prop_assert_eq!(a.mul(&b).div(&b), a.clone());
        }
        prop_assert!((a.mul(&b).to_f64() - a.to_f64() * b.to_f64()).abs() <= 1e-9 * (1.0 + (a.to_f64() * b.to_f64()).abs()));
    }

    #[test]
    fn heat_is_linear_and_permutation_equivariant(
        c1 in proptest::collection::vec(-3.0f64..3.0, 10),
        c2 in proptest::collection::vec(-3.0f64..3.0, 10),
        y in 0.1f64..5.0,
        s in -2.0f64..2.0,
    ) {
        // quadratics in 4 variables; the swap x0 ↔ x1 keeps the degree split (p = 2)
        let monos: Vec<Vec<u32>> = (0..4).flat_map(|i| (i..4).map(move |j| {
            let mut e = vec![0u32; 4];
            e[i] += 1;
            e[j] += 1;
            e
        })).collect();
        let p = MultiPoly::from_terms(4, monos.iter().cloned().zip(c1.iter().copied()));
        let q = MultiPoly::from_terms(4, monos.iter().cloned().zip(c2.iter().copied()));
        let lhs = heat_operator_at(&p.add(&q.scale(&s)), y);
        let rhs = heat_operator_at(&p, y).add(&heat_operator_at(&q, y).scale(&s));
        prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-12);
        let perm: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| {
            let pi = [1, 0, 2, 3][i];
            if j == pi { 1.0 } else { 0.0 }
        }).collect()).collect();
        let a = heat_operator_at(&p.substitute_linear(&perm), y);
        let b = heat_operator_at(&p, y).substitute_linear(&perm);
        prop_assert!(a.max_coeff_diff(&b) < 1e-12);
    }

    #[test]
    fn translations_compose(a in proptest::collection::vec(-3.0f64..3.0, 10), b in proptest::collection::vec(-3.0f64..3.0, 10)) {
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let d = translation_matrix(&a) * translation_matrix(&b) - translation_matrix(&s);
        prop_assert!(d.amax() < 1e-10);
    }

    #[test]
    fn sl2_group(a in -6i64..=6, b in -6i64..=6, c in -6i64..=6, x in -2.0f64..2.0, y in 0.2f64..3.0) {
        // complete (a, c) to a matrix of determinant 1
        let (g, s, t) = egcd(a, c);
        prop_assume!(g == 1);
        let m = Sl2::new(a, -t + b * a, c, s + b * c).unwrap();
        let tau = Complex64::new(x, y);
        let back = m.inverse().act(m.act(tau));
        prop_assert!((back - tau).norm() < 1e-9 * (1.0 + tau.norm()));
        prop_assert_eq!(m.mul(&m.inverse()), Sl2::IDENTITY);
        prop_assert!(m.act(tau).im > 0.0);
    }

    #[test]
    fn bessel_integral_matches_quadrature(s in 0.5f64..6.0, a in 0.2f64..20.0, b in 0.2f64..5.0) {
        let cfg = AdaptiveConfig { order: 20, abs_tol: 0.0, rel_tol: 1e-13, max_depth: 40 };
        let peak = (b / a).sqrt();
        let q = adaptive_log(|y| y.powf(s - 1.0) * (-a * y - b / y).exp(), peak * 1e-4 * (b / 80.0).min(1.0), peak * 1e4 + 150.0 / a, &cfg).value;
        let v = bessel_integral(s, a, b);
        prop_assert!((v - q).abs() <= 1e-9 * v, "{} vs {}", v, q);
    }
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

#[test]
fn coprime_pairs_are_symmetric() {
    let p = coprime_pairs(12);
    let set: BTreeSet<(i64, i64)> = p.iter().copied().collect();
    assert_eq!(set.len(), p.len());
    assert!(p.iter().all(|&(c, d)| set.contains(&(-c, -d)) && num_integer::gcd(c, d) == 1));
}

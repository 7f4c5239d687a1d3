use std::collections::BTreeSet;

use kmlift::lattice::*;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::Rational64;

/// The 240 roots of E8 in the even coordinate system, doubled to stay integral.
fn standard_roots_doubled() -> Vec<[i64; 8]> {
    let mut out = Vec::new();
    for i in 0..8 {
        for j in i + 1..8 {
            for si in [-2, 2] {
                for sj in [-2, 2] {
                    let mut v = [0; 8];
                    v[i] = si;
                    v[j] = sj;
                    out.push(v);
                }
            }
        }
    }
    for mask in 0u32..256 {
        if mask.count_ones() % 2 == 0 {
            let mut v = [1; 8];
            for (k, x) in v.iter_mut().enumerate() {
                if mask >> k & 1 == 1 {
                    *x = -1;
                }
            }
            out.push(v);
        }
    }
    out
}

/// Bourbaki simple roots, doubled.
fn simple_roots_doubled() -> DMatrix<f64> {
    let mut cols = vec![[1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 1.0]];
    cols.push([2.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    for i in 0..6 {
        let mut c = [0.0; 8];
        c[i] = -2.0;
        c[i + 1] = 2.0;
        cols.push(c);
    }
    DMatrix::from_fn(8, 8, |r, c| cols[c][r])
}

#[test]
fn e8_roots_match_standard_coordinates() {
    let e8 = e8_lattice();
    assert_eq!(e8.det(), BigInt::from(1));
    assert!((0..8).all(|i| e8.gram()[i][i] == 2));
    let basis = simple_roots_doubled();
    // the simple roots reproduce the Gram used by the crate
    let g = basis.transpose() * &basis / 4.0;
    assert!((g - e8.gram_f64()).amax() < 1e-12);
    let lu = basis.clone().lu();
    let mut oracle = BTreeSet::new();
    for r in standard_roots_doubled() {
        let c = lu.solve(&DVector::from_row_slice(&r.map(|x| x as f64))).unwrap();
        let ci: Vec<i64> = c.iter().map(|x| x.round() as i64).collect();
        assert!(c.iter().zip(&ci).all(|(a, b)| (a - *b as f64).abs() < 1e-9));
        assert_eq!(e8.quadratic_form(&LatticeVector::new(ci.clone())).unwrap(), Rational64::from_integer(1));
        oracle.insert(ci);
    }
    assert_eq!(oracle.len(), 240);
    let found: BTreeSet<Vec<i64>> = enumerate_majorant(&Majorant::new(e8.gram_f64()).unwrap(), 2.0)
        .unwrap()
        .into_iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.coords)
        .collect();
    assert_eq!(found, oracle);
}

#[test]
fn sums_and_split_lattices() {
    let u = hyperbolic_plane();
    let e8 = e8_lattice();
    assert_eq!(direct_sum(&u, &u).signature(), (2, 2));
    let eu = direct_sum(&e8, &u);
    assert_eq!(eu.rank(), 10);
    assert_eq!(eu.det(), BigInt::from(-1));
    assert_eq!(direct_sum(&e8, &e8).signature(), (16, 0));
    assert_eq!(u.quadratic_form(&LatticeVector::new(vec![1, 0])).unwrap(), Rational64::from_integer(0));
    assert_eq!(u.quadratic_form(&LatticeVector::new(vec![3, 2])).unwrap(), Rational64::from_integer(6));
    for a in -20..=20 {
        assert_eq!(u.quadratic_form(&LatticeVector::new(vec![a, 1])).unwrap(), Rational64::from_integer(a));
    }
    for b in [10usize, 18] {
        let s = signature_b2_lattice(b).unwrap();
        assert_eq!(s.l.rank(), b + 2);
        assert_eq!(s.l.signature(), (b, 2));
        assert_eq!(s.k.signature(), (b - 1, 1));
        assert_eq!(inertia(s.l.gram()).unwrap(), (b, 2));
        assert!(s.l.is_unimodular());
        assert_eq!(determinant(s.l.gram()), BigInt::from(1));
        assert!((0..b + 2).all(|i| s.l.gram()[i][i] % 2 == 0));
        let g0 = real_basis_map(&s).unwrap();
        assert!(g0.residual(&s.l) < 1e-12);
    }
    assert!(matches!(signature_b2_lattice(11), Err(kmlift::error::Error::Signature { .. })));
}

#[test]
fn represent_every_integer_up_to_100() {
    let s = signature_b2_lattice(10).unwrap();
    for n in 1..=100 {
        let v = s.represent_integer(n).unwrap();
        assert_eq!(s.k.quadratic_form(&v).unwrap(), Rational64::from_integer(n));
    }
    assert!(s.represent_integer(0).is_err());
}

#[test]
fn divisor_examples() {
    let d = |c: Vec<i64>| vector_divisors(&LatticeVector::new(c)).unwrap();
    assert_eq!(d(vec![2, 4, 6]), vec![1, 2]);
    assert_eq!(d(vec![3, 5]), vec![1]);
    assert_eq!(d(vec![6, 12]), vec![1, 2, 3, 6]);
    assert!(vector_divisors(&LatticeVector::new(vec![0, 0])).is_err());
}

fn box_search(gram: &DMatrix<f64>, bound: f64, half: i64) -> BTreeSet<Vec<i64>> {
    let n = gram.nrows();
    let mut out = BTreeSet::new();
    let mut c = vec![-half; n];
    loop {
        let v: f64 = (0..n).map(|i| (0..n).map(|j| c[i] as f64 * gram[(i, j)] * c[j] as f64).sum::<f64>()).sum();
        if v <= bound + enumerate::boundary_slack(bound) {
            out.insert(c.clone());
        }
        let mut i = 0;
        while i < n {
            c[i] += 1;
            if c[i] <= half {
                break;
            }
            c[i] = -half;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

#[test]
fn hyperbolic_majorant_matches_box() {
    // U with w spanned by u − u′: the majorant is the identity in these coordinates
    let g = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let w = [1.0, -1.0];
    let gw = &g * DVector::from_row_slice(&w);
    let w2 = DVector::from_row_slice(&w).dot(&gw);
    let maj: DMatrix<f64> = &g - 2.0 * &gw * gw.transpose() / w2;
    assert!((&maj - DMatrix::identity(2, 2)).amax() < 1e-15);
    let m = Majorant::new(maj.clone()).unwrap();
    let found: BTreeSet<Vec<i64>> = enumerate_majorant(&m, 4.0).unwrap().into_iter().map(|v| v.coords).collect();
    assert_eq!(found, box_search(&maj, 4.0, 3));
    assert_eq!(found.len() % 2, 1);
    assert_eq!(enumerate_majorant(&m, 0.0).unwrap(), vec![LatticeVector::new(vec![0, 0])]);
}

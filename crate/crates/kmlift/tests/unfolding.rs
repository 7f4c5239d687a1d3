mod common;

use common::random_tube_point;
use kmlift::geometry::{psi, TubePoint};
use kmlift::lattice::{real_basis_map, signature_b2_lattice};
use kmlift::quad::AdaptiveConfig;
use kmlift::theta::Truncation;
use kmlift::unfolding::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn expansion_matches_strip_quadrature() {
    let split = signature_b2_lattice(10).unwrap();
    let g0 = real_basis_map(&split).unwrap();
    let f = CuspFormProxy::unit(6, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let y = TubePoint::base(10).y;
    let xs: Vec<Vec<f64>> = (0..2).map(|_| (0..10).map(|_| rng.gen_range(-0.5..0.5)).collect()).collect();
    let rep = expansion_vs_quadrature(&split, &g0, &f, 1, 2, &y, &xs, &Truncation::auto(1e-12), &StripConfig::default()).unwrap();
    for r in &rep.rows {
        println!("{} {} edge {:.1e}", r.quadrature, r.series, r.edge_estimate);
    }
    assert!(rep.max_residual < 1e-4 && rep.relative_residual < 1e-6, "{rep:?}");
}

#[test]
fn series_is_periodic_in_x() {
    let split = signature_b2_lattice(10).unwrap();
    let g0 = real_basis_map(&split).unwrap();
    let f = CuspFormProxy::unit(6, 1).unwrap();
    let z = TubePoint::base(10);
    let ctx = UnfoldContext::new(&split, &g0, &psi(&z).unwrap(), 1, 2).unwrap();
    let x0 = vec![0.1, -0.2, 0.05, 0.0, 0.3, 0.0, 0.0, 0.1, 0.0, 0.2];
    let mut x1 = x0.clone();
    // a lattice vector of K in tube coordinates: integral shifts keep e((λ, X))
    x1[0] += 1.0;
    x1[9] -= 2.0;
    let cfg = StripConfig::default();
    let r = cfg.radius(&ctx, 1);
    let a = fourier_series(&ctx, &f, &x0, r, CoefficientMethod::Bessel).unwrap();
    let b = fourier_series(&ctx, &f, &x1, r, CoefficientMethod::Bessel).unwrap();
    assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300), "{a} vs {b}");
}

#[test]
fn constant_term_independent_of_x_and_converged_in_y() {
    let split = signature_b2_lattice(10).unwrap();
    let g0 = real_basis_map(&split).unwrap();
    let f = CuspFormProxy::new(6, vec![Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.25)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let z = random_tube_point(10, &mut rng);
    let xp: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c1 = UnfoldContext::new(&split, &g0, &psi(&z).unwrap(), 1, 2).unwrap();
    let c2 = UnfoldContext::new(&split, &g0, &psi(&z.translated(&xp)).unwrap(), 1, 2).unwrap();
    let cfg = ConstantTermConfig::default();
    let a = constant_term(&c1, &f, &cfg).unwrap();
    let b = constant_term(&c2, &f, &cfg).unwrap();
    assert!((a.value - b.value).norm() < 1e-10 * a.value.norm().max(1.0));
    let wide = ConstantTermConfig { y_max: 2.0 * cfg.y_max, ..cfg.clone() };
    let c = constant_term(&c1, &f, &wide).unwrap();
    assert!((a.value - c.value).norm() <= a.y_max_tail + 1e-12, "{} vs {} bound {}", a.value, c.value, a.y_max_tail);
    assert_eq!(constant_term(&c1, &CuspFormProxy::zero(6), &cfg).unwrap().value, Complex64::new(0.0, 0.0));
}

#[test]
fn unfolding_identity_s3() {
    let cfg = AdaptiveConfig { order: 15, abs_tol: 1e-9, rel_tol: 1e-9, max_depth: 20 };
    let r = generic_unfold_check(3.0, 40, &cfg).unwrap();
    println!("{r:?}");
    assert!(r.residual < 1e-4);
}

/// The shortfall at s = 2.5 comes from the coset cutoff alone: it shrinks by
/// a factor of about 5.4 per doubling of C and is independent of the
/// quadrature tolerance.
#[test]
fn coset_cutoff_controls_the_residual() {
    let cfg = AdaptiveConfig { order: 15, abs_tol: 1e-9, rel_tol: 1e-9, max_depth: 20 };
    let r: Vec<UnfoldCheck> = [20, 40, 80].iter().map(|&c| generic_unfold_check(2.5, c, &cfg).unwrap()).collect();
    assert!(r.iter().all(|x| x.lhs < x.rhs));
    for w in r.windows(2) {
        let ratio = w[0].residual / w[1].residual;
        assert!((4.5..6.5).contains(&ratio), "{ratio}");
    }
    assert!((r[1].residual - 1.140e-4).abs() < 1e-6, "{}", r[1].residual);
    assert!(r[2].residual < 1e-4);
}

mod common;

use common::*;
use kmlift::geometry::{psi, Isometry};
use kmlift::lattice::{real_basis_map, signature_b2_lattice, Lattice};
use kmlift::polynomials::{p_alpha_beta, MultiPoly};
use kmlift::theta::{f_alpha_beta, modular_check, siegel_theta, split_rhs, Sl2, ThetaInput, ThetaModel, Truncation};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn theta_matches_box_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (k, gram) in small_lattices().into_iter().cycle().take(10).enumerate() {
        let lat = Lattice::new(gram, false).unwrap();
        let gf = lat.gram_f64();
        let (basis, p) = real_basis(&gf);
        let n = gf.nrows();
        let g = random_isometry(p, n - p, 0.3, &mut rng);
        let model = ThetaModel::new(gf.clone(), &g * &basis, p, lat.signature()).unwrap();
        let tau = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..1.6));
        let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let beta: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let poly = random_poly(n, 1 + (k as u32 % 3), &mut rng);
        let input = ThetaInput::new(model.clone(), tau, poly.clone(), Truncation::auto(1e-15)).with_shifts(alpha.clone(), beta.clone());
        let v = siegel_theta(&input).unwrap();
        let half = if n <= 3 { 12 } else { 7 };
        let brute = brute_theta(&gf, &model.map, p, tau, &alpha, &beta, &poly, half);
        assert!((v.value - brute).norm() < 1e-12, "case {k}: {} vs {}", v.value, brute);
        assert!(v.tail_estimate <= 1e-15);
    }
}

#[test]
fn modular_s_and_t_on_rank_four() {
    let lat = Lattice::new(small_lattices()[3].clone(), true).unwrap();
    let (basis, p) = real_basis(&lat.gram_f64());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_isometry(2, 2, 0.4, &mut rng);
    let model = ThetaModel::new(lat.gram_f64(), &g * &basis, p, (2, 2)).unwrap();
    let poly = MultiPoly::var(4, 0).mul(&MultiPoly::var(4, 1)).scale(&2.0);
    for gamma in [Sl2::S, Sl2::T, Sl2::T.mul(&Sl2::S)] {
        let input = ThetaInput::new(model.clone(), Complex64::new(0.1, 1.2), poly.clone(), Truncation::auto(1e-13))
            .with_shifts(vec![0.5, 0.0, 0.25, -0.5], vec![0.0, 0.5, 0.5, 0.0]);
        let r = modular_check(&input, &gamma).unwrap();
        assert!(r.residual < 1e-10, "{gamma:?}: {}", r.residual);
    }
}

#[test]
fn block_factorization_matches_direct() {
    let split = signature_b2_lattice(10).unwrap();
    let g0 = real_basis_map(&split).unwrap();
    let model = ThetaModel::l_model(&split, &g0, &Isometry::identity(12)).unwrap();
    let poly = p_alpha_beta::<f64>(1, 9, 10).unwrap().add(&MultiPoly::var(12, 10).pow(2));
    let tau = Complex64::new(0.3, 1.4);
    let blocked = siegel_theta(&ThetaInput::new(model.clone(), tau, poly.clone(), Truncation::auto(1e-13))).unwrap();
    let heat = kmlift::polynomials::heat_operator(&poly).compile();
    let r = model.auto_radius(tau.im, kmlift::theta::heat_size(&heat, tau.im), 1e-13);
    let direct = kmlift::theta::theta_direct(&model, tau, &[0.0; 12], &[0.0; 12], &heat, r).unwrap();
    assert!((blocked.value - direct.value).norm() < 1e-10, "{} vs {}", blocked.value, direct.value);
}

#[test]
fn split_matches_theta_of_l() {
    let split = signature_b2_lattice(10).unwrap();
    let g0 = real_basis_map(&split).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = random_tube_point(10, &mut rng);
    let g = psi(&z).unwrap();
    let tau = Complex64::new(0.2, 1.7);
    let trunc = Truncation::auto(1e-10);
    let f = f_alpha_beta(&split, &g0, &g, 1, 2, tau, &trunc).unwrap();
    let s = split_rhs(&split, &g0, &g, 1, 2, tau, &trunc).unwrap();
    assert!((f.value - s.value).norm() < 1e-6, "{} vs {}", f.value, s.value);
}

#[test]
fn theta_rejects_bad_input() {
    let lat = Lattice::new(small_lattices()[0].clone(), true).unwrap();
    let (basis, p) = real_basis(&lat.gram_f64());
    let model = ThetaModel::new(lat.gram_f64(), basis, p, (1, 1)).unwrap();
    let one = MultiPoly::constant(2, 1.0);
    let bad = ThetaInput::new(model.clone(), Complex64::new(0.0, -1.0), one.clone(), Truncation::auto(1e-10));
    assert!(siegel_theta(&bad).is_err());
    let bad = ThetaInput::new(model, Complex64::new(0.0, 1.0), one, Truncation::with_radius(-1.0));
    assert!(siegel_theta(&bad).is_err());
}

mod common;

use common::random_tube_point;
use kmlift::geometry::{PointFrame, TubePoint};
use kmlift::injectivity::*;
use kmlift::lattice::{real_basis_map, signature_b2_lattice, LatticeVector};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_positive(split: &kmlift::lattice::SplitLattice, rng: &mut ChaCha8Rng) -> LatticeVector {
    loop {
        let v = LatticeVector::new((0..split.b).map(|_| rng.gen_range(-3..=3)).collect());
        if split.k.quadratic_form(&v).unwrap() > Rational64::from_integer(0) {
            return v;
        }
    }
}

#[test]
fn random_witnesses_give_negative_terms() {
    let split = signature_b2_lattice(10).unwrap();
    let g0 = real_basis_map(&split).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let base = PointFrame::from_tube(&TubePoint::base(10)).unwrap();
    let mut negated = 0;
    for i in 0..100 {
        let lam = random_positive(&split, &mut rng);
        let w = find_witness(&split, &g0, &lam).unwrap();
        negated += w.negated as usize;
        assert!(w.alpha != w.beta && w.alpha < 10 && w.beta < 10);
        assert!(w.p1_value > 0.0);
        let cf = closed_form_check(&split, &w).unwrap();
        assert!(cf.matches, "{lam:?}: {} vs {}", cf.piece_value, w.p1_value);
        // a few frames away from the base point as well
        let frame = if i % 4 == 0 {
            base.clone()
        } else {
            PointFrame::from_tube(&random_tube_point(10, &mut rng)).unwrap()
        };
        let k = 6;
        let t = imaginary_part_term(&w, k, &frame);
        assert!(t < 0.0, "{t}");
        let q = imaginary_part_quadrature(&w, k, &frame);
        assert!((t - q).abs() <= 1e-9 * t.abs(), "{t} vs {q}");
        let mut w2 = w.clone();
        w2.p1_value *= 2.0;
        assert!((imaginary_part_term(&w2, k, &frame) - 2.0 * t).abs() <= 1e-15 * t.abs());
    }
    assert!(negated > 0, "sign normalization never exercised");
}

#[test]
fn certificate_fifty_steps() {
    let r = injectivity_certificate(50, 10).unwrap();
    assert!(r.passed);
    assert_eq!(r.steps.len(), 50);
    assert!(r.steps.iter().all(|s| s.passed && s.closed_form_exact && s.term_value < 0.0));
    // p₁ = 2√2 (n + 1)/√2
    for s in &r.steps {
        assert_eq!(s.p1_exact.as_deref(), Some((2 * (s.n + 1)).to_string().as_str()));
    }
    assert!(injectivity_certificate(0, 10).is_err());
    assert!(injectivity_certificate(5, 11).is_err());
}

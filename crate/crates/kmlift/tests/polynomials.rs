use kmlift::exact::{Coeff, QSqrt2};
use kmlift::isometries::{identity, isometry_from_word, rotation_example, swap_matrix};
use kmlift::polynomials::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = QSqrt2;

fn var(n: usize, i: usize) -> MultiPoly<Q> {
    MultiPoly::var(n, i - 1)
}

#[test]
fn reconstruction_exact_for_random_isometries() {
    let b = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let word: Vec<u64> = (0..rng.gen_range(2..6)).map(|_| rng.gen_range(0..4000)).collect();
        let g = isometry_from_word::<Q>(b, &word);
        let frame = ExactFrame::from_isometry(&g).unwrap();
        let alpha = rng.gen_range(1..b);
        let beta = (alpha + rng.gen_range(0..b - 2)) % (b - 1) + 1;
        let p = p_alpha_beta::<Q>(alpha, beta, b).unwrap();
        let dec = decompose_exact(alpha, beta, &frame).unwrap();
        assert!(reconstruction_defect(&p, &frame, &dec.as_map()).is_zero(), "word {word:?}");
        // the general derivative formula agrees with the closed forms
        let general = decompose_general(&p, &frame);
        for h in 0..3u32 {
            let piece = general.get(&(h, 0)).cloned().unwrap_or_else(|| MultiPoly::zero(b + 2));
            assert_eq!(piece, dec.pieces[h as usize]);
        }
        assert!(general.keys().all(|&(_, hm)| hm == 0));
        for (h, piece) in dec.pieces.iter().enumerate() {
            if !piece.is_zero() {
                assert_eq!(piece.split_degree(b), Some((2 - h as u32, 0)));
            }
        }
    }
}

#[test]
fn rotation_example_pieces() {
    let b = 10;
    let n = b + 2;
    for (alpha, beta) in [(1, 2), (4, 7), (9, 3)] {
        let g = rotation_example::<Q>(b, alpha, beta).unwrap();
        let frame = ExactFrame::from_isometry(&g).unwrap();
        let dec = decompose_exact(alpha, beta, &frame).unwrap();
        let c = dec.composed(&frame);
        assert_eq!(c[0], var(n, alpha).mul(&var(n, alpha)));
        assert!(c[1].is_zero());
        assert_eq!(c[2], MultiPoly::constant(n, Q::int(-2)));
        // P∘g = x_α² − x_b²
        let p = p_alpha_beta::<Q>(alpha, beta, b).unwrap().substitute_linear(&g);
        assert_eq!(p, var(n, alpha).mul(&var(n, alpha)).sub(&var(n, b).mul(&var(n, b))));
        assert!(!c[0].laplacian().is_zero());
    }
}

#[test]
fn swap_piece_is_2_sqrt2_x_beta() {
    let b = 10;
    let n = b + 2;
    for (alpha, beta) in [(1, 2), (2, 1), (5, 9)] {
        let g = swap_matrix::<Q>(alpha, b).unwrap();
        let frame = ExactFrame::from_isometry(&g).unwrap();
        let c = decompose_exact(alpha, beta, &frame).unwrap().composed(&frame);
        assert_eq!(c[1], var(n, beta).scale(&Q::sqrt2().mul(&Q::int(2))));
        assert!(c[0].is_zero() && c[2].is_zero());
    }
}

#[test]
fn identity_keeps_only_h0() {
    let b = 10;
    let frame = ExactFrame::from_isometry(&identity::<Q>(b + 2)).unwrap();
    let dec = decompose_exact(3, 7, &frame).unwrap();
    assert_eq!(dec.pieces[0], p_alpha_beta::<Q>(3, 7, b).unwrap());
    assert!(dec.pieces[1].is_zero() && dec.pieces[2].is_zero());
}

#[test]
fn laplacian_and_heat_examples() {
    let b = 10;
    for a in 1..=b {
        for c in 1..=b {
            let l = laplacian(&p_alpha_beta::<Q>(a, c, b).unwrap());
            if a == c {
                assert_eq!(l, MultiPoly::constant(b + 2, Q::int(4)));
            } else {
                assert!(l.is_zero());
            }
        }
    }
    assert!(p_alpha_beta::<Q>(1, b + 1, b).is_err());
    assert!(laplacian(&MultiPoly::constant(3, Q::int(7))).is_zero());
    let x1sq = MultiPoly::<f64>::from_terms(3, [(vec![2, 0, 0], 1.0)]);
    let y = 0.8;
    let h = heat_operator_at(&x1sq, y);
    let want = x1sq.add(&MultiPoly::constant(3, -1.0 / (4.0 * std::f64::consts::PI * y)));
    assert!(h.max_coeff_diff(&want) < 1e-15);
    let far = heat_operator_at(&x1sq.scale(&2.0), 1e12);
    assert!(far.max_coeff_diff(&x1sq.scale(&2.0)) < 1e-12);
    let harmonic = p_alpha_beta::<f64>(1, 2, b).unwrap();
    assert_eq!(heat_operator_at(&harmonic, 0.3), harmonic);
}

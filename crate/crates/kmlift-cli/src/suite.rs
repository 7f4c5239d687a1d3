//! The verification checks behind `suite all`, parameterized by sample
//! counts so the single-purpose subcommands can reuse them.

use std::f64::consts::PI;

use kmlift::exact::{Coeff, QSqrt2};
use kmlift::geometry::{psi, Isometry, TubePoint};
use kmlift::injectivity::injectivity_certificate;
use kmlift::isometries::{isometry_from_word, rotation_example, swap_matrix};
use kmlift::lattice::*;
use kmlift::polynomials::*;
use kmlift::quad::{adaptive_log, AdaptiveConfig};
use kmlift::special::bessel_integral;
use kmlift::theta::*;
use kmlift::unfolding::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::scenario::CliResult;

#[derive(Clone, Debug, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub metrics: Vec<Metric>,
    pub detail: String,
}

impl Check {
    fn new(id: usize, name: &str) -> Self {
        Check { id, name: name.into(), passed: true, metrics: vec![], detail: String::new() }
    }

    fn metric(&mut self, name: &str, value: f64, tolerance: f64) {
        self.passed &= value < tolerance;
        self.metrics.push(Metric { name: name.into(), value, tolerance });
    }

    /// A yes/no condition as a metric: 0 when it holds, 1 otherwise.
    fn flag(&mut self, name: &str, ok: bool) {
        self.metric(name, if ok { 0.0 } else { 1.0 }, 0.5);
    }

    fn detail(mut self, d: String) -> Self {
        self.detail = d;
        self
    }
}

/// Sample counts and truncations of one suite run.
#[derive(Clone, Debug, Serialize)]
pub struct Profile {
    pub name: &'static str,
    pub decompositions: usize,
    pub theta_cases: usize,
    pub modular_all: bool,
    pub split_cases: usize,
    pub unfold_s: Vec<f64>,
    pub x_samples: usize,
    pub coefficient_cases: usize,
    pub x_shifts: usize,
    pub constant_tail: f64,
    pub certificate_n: i64,
}

impl Profile {
    pub fn full() -> Self {
        Profile {
            name: "full",
            decompositions: 50,
            theta_cases: 20,
            modular_all: true,
            split_cases: 10,
            unfold_s: vec![2.5, 3.0],
            x_samples: 5,
            coefficient_cases: 20,
            x_shifts: 20,
            constant_tail: 1e-10,
            certificate_n: 100,
        }
    }

    /// Fewer samples; the generic unfolding runs at s = 3 only, where the
    /// coset cutoff 40 leaves a residual well inside the tolerance.
    pub fn fast() -> Self {
        Profile {
            name: "fast",
            decompositions: 10,
            theta_cases: 6,
            modular_all: false,
            split_cases: 2,
            unfold_s: vec![3.0],
            x_samples: 1,
            coefficient_cases: 5,
            x_shifts: 2,
            constant_tail: 1e-8,
            certificate_n: 20,
        }
    }
}

pub const BASIS_MAP_RESIDUAL: f64 = 1e-12;
pub const THETA_ORACLE: f64 = 1e-12;
pub const MODULAR_RESIDUAL: f64 = 1e-8;
pub const MODULAR_TAIL: f64 = 1e-10;
pub const SPLIT_RESIDUAL: f64 = 1e-6;
pub const UNFOLD_RESIDUAL: f64 = 1e-4;
pub const BESSEL_GRID: f64 = 1e-10;
pub const EXPANSION_RESIDUAL: f64 = 1e-4;
pub const COEFFICIENT_METHODS: f64 = 1e-9;
pub const X_INDEPENDENCE: f64 = 1e-6;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn random_tube_point(b: usize, rng: &mut impl Rng) -> TubePoint {
    let x: Vec<f64> = (0..b).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut y: Vec<f64> = (0..b).map(|_| rng.gen_range(-0.2..0.2)).collect();
    y[0] = rng.gen_range(0.6..1.5);
    y[b - 1] = -rng.gen_range(0.6..1.5);
    TubePoint::new(x, y).expect("Y lies in the cone")
}

/// λ ∈ K with 0 < q(λ) ≤ max_norm and entries in −2..=2.
pub fn random_positive(split: &SplitLattice, max_norm: i64, rng: &mut impl Rng) -> LatticeVector {
    loop {
        let v = LatticeVector::new((0..split.b).map(|_| rng.gen_range(-2..=2)).collect());
        let q = split.k.quadratic_form(&v).expect("dimension matches");
        if *q.numer() > 0 && q.to_integer() <= max_norm && q.is_integer() {
            return v;
        }
    }
}

pub fn lattice_integrity(b: usize) -> CliResult<Check> {
    let mut c = Check::new(1, "lattice integrity");
    let e8 = e8_lattice();
    c.flag("det(E8) = 1", e8.det() == 1.into());
    let roots: Vec<LatticeVector> = enumerate_majorant(&Majorant::new(e8.gram_f64())?, 2.0)?.into_iter().filter(|v| !v.is_zero()).collect();
    let one = num_rational::Rational64::from_integer(1);
    c.flag("240 vectors of norm 1", roots.len() == 240 && roots.iter().all(|v| e8.quadratic_form(v) == Ok(one)));
    let split = signature_b2_lattice(b)?;
    let l = &split.l;
    c.flag("L even", (0..b + 2).all(|i| l.gram()[i][i] % 2 == 0));
    c.flag("L unimodular", determinant(l.gram()).magnitude() == &1u32.into());
    c.flag("signature (b, 2)", inertia(l.gram())? == (b, 2));
    let res = real_basis_map(&split)?.residual(l);
    c.metric("real_basis_map residual", res, BASIS_MAP_RESIDUAL);
    Ok(c.clone().detail(format!("{} roots, g0 residual {res:.1e}", roots.len())))
}

pub fn decomposition(b: usize, n: usize, rng: &mut impl Rng) -> CliResult<Check> {
    let mut c = Check::new(2, "polynomial decomposition");
    let mut recon = 0;
    for _ in 0..n {
        let word: Vec<u64> = (0..rng.gen_range(2..6)).map(|_| rng.gen_range(0..4000)).collect();
        let frame = ExactFrame::from_isometry(&isometry_from_word::<QSqrt2>(b, &word))?;
        let alpha = rng.gen_range(1..b);
        let beta = (alpha + rng.gen_range(0..b - 2)) % (b - 1) + 1;
        let p = p_alpha_beta::<QSqrt2>(alpha, beta, b)?;
        let dec = decompose_exact(alpha, beta, &frame)?;
        recon += reconstruction_defect(&p, &frame, &dec.as_map()).is_zero() as usize;
    }
    c.metric("inexact reconstructions", (n - recon) as f64, 0.5);
    let var = |i: usize| MultiPoly::<QSqrt2>::var(b + 2, i - 1);
    let frame = ExactFrame::from_isometry(&rotation_example::<QSqrt2>(b, 1, 2)?)?;
    let r = decompose_exact(1, 2, &frame)?.composed(&frame);
    c.flag("rotation example (x_α², 0, −2)", r[0] == var(1).mul(&var(1)) && r[1].is_zero() && r[2] == MultiPoly::constant(b + 2, QSqrt2::int(-2)));
    let frame = ExactFrame::from_isometry(&swap_matrix::<QSqrt2>(1, b)?)?;
    let s = decompose_exact(1, 2, &frame)?.composed(&frame);
    c.flag("swap piece 2√2 x_β", s[1] == var(2).scale(&QSqrt2::sqrt2().mul(&QSqrt2::int(2))));
    Ok(c.detail(format!("{recon}/{n} exact reconstructions")))
}

fn small_lattices() -> Vec<Vec<Vec<i64>>> {
    vec![
        vec![vec![0, 1], vec![1, 0]],
        vec![vec![2, 1], vec![1, 2]],
        vec![vec![2, 1, 0], vec![1, 2, 0], vec![0, 0, -2]],
        vec![vec![4, 1, 0, 0], vec![1, 2, 1, 0], vec![0, 1, -2, 0], vec![0, 0, 0, 2]],
    ]
}

/// Rows are the images of the lattice basis scaled so that the Gram matrix
/// is diag(±1) in the ambient space; positive directions first.
fn real_basis(gram: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let n = gram.nrows();
    let eig = gram.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let p = order.iter().filter(|&&i| eig.eigenvalues[i] > 0.0).count();
    (DMatrix::from_fn(n, n, |r, c| eig.eigenvalues[order[r]].abs().sqrt() * eig.eigenvectors[(c, order[r])]), p)
}

/// Box sum over |c_i| ≤ half of H(x) e(τq(x₊) + τ̄q(x₋) − (c + β/2, α)).
#[allow(clippy::too_many_arguments)]
fn box_theta(gram: &DMatrix<f64>, map: &DMatrix<f64>, p: usize, tau: Complex64, alpha: &[f64], beta: &[f64], poly: &MultiPoly<f64>, half: i64) -> Complex64 {
    let n = gram.nrows();
    let heat = heat_operator_at(poly, tau.im);
    let side = (2 * half + 1) as usize;
    let mut total = Complex64::new(0.0, 0.0);
    for idx in 0..side.pow(n as u32) {
        let mut r = idx;
        let c: Vec<f64> = (0..n)
            .map(|_| {
                let v = (r % side) as i64 - half;
                r /= side;
                v as f64
            })
            .collect();
        let x: Vec<f64> = (0..n).map(|i| (0..n).map(|j| map[(i, j)] * (c[j] + beta[j])).sum()).collect();
        let qp = 0.5 * x[..p].iter().map(|t| t * t).sum::<f64>();
        let qm = -0.5 * x[p..].iter().map(|t| t * t).sum::<f64>();
        let pair: f64 = (0..n).map(|i| (0..n).map(|j| (c[i] + 0.5 * beta[i]) * gram[(i, j)] * alpha[j]).sum::<f64>()).sum();
        total += heat.eval(&x) * (Complex64::new(0.0, 2.0 * PI) * (tau * qp + tau.conj() * qm - pair)).exp();
    }
    total
}

pub fn theta_oracle(n: usize, rng: &mut impl Rng) -> CliResult<Check> {
    let mut c = Check::new(3, "theta oracle");
    let mut worst = 0.0f64;
    for (k, gram) in small_lattices().into_iter().cycle().take(n).enumerate() {
        let lat = Lattice::new(gram, false)?;
        let gf = lat.gram_f64();
        let (basis, p) = real_basis(&gf);
        let dim = gf.nrows();
        let model = ThetaModel::new(gf.clone(), basis.clone(), p, lat.signature())?;
        let tau = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..1.6));
        let alpha: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let beta: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let mut poly = MultiPoly::zero(dim);
        for _ in 0..3 {
            let mut ex = vec![0u32; dim];
            for _ in 0..1 + k % 3 {
                ex[rng.gen_range(0..dim)] += 1;
            }
            poly = poly.add(&MultiPoly::from_terms(dim, [(ex, rng.gen_range(-1.0..1.0))]));
        }
        let v = siegel_theta(&ThetaInput::new(model, tau, poly.clone(), Truncation::auto(1e-15)).with_shifts(alpha.clone(), beta.clone()))?;
        let half = if dim <= 3 { 12 } else { 7 };
        worst = worst.max((v.value - box_theta(&gf, &basis, p, tau, &alpha, &beta, &poly, half)).norm());
    }
    c.metric("max |Θ − box sum|", worst, THETA_ORACLE);
    Ok(c.detail(format!("{n} cases, max |Θ − box| = {worst:.1e}")))
}

pub struct ModularRow {
    pub tau: Complex64,
    pub gamma: Sl2,
    pub alpha: usize,
    pub beta: usize,
    pub residual: ModularResidual,
}

/// Modular checks of Θ_L(τ, g, P_{α,β}); the automorphy factor multiplies
/// the right-hand tail, hence the small tail target.
pub fn modular_rows(split: &SplitLattice, g0: &RealBasisMap, g: &Isometry, pairs: &[(usize, usize)], taus: &[Complex64], gammas: &[Sl2], tail: f64) -> CliResult<Vec<ModularRow>> {
    let model = ThetaModel::l_model(split, g0, g)?;
    let mut rows = vec![];
    for &(alpha, beta) in pairs {
        let poly = p_alpha_beta::<f64>(alpha, beta, split.b)?;
        for &tau in taus {
            for gamma in gammas {
                let input = ThetaInput::new(model.clone(), tau, poly.clone(), Truncation::auto(tail));
                rows.push(ModularRow { tau, gamma: *gamma, alpha, beta, residual: modular_check(&input, gamma)? });
            }
        }
    }
    Ok(rows)
}

pub fn default_gammas() -> Vec<Sl2> {
    vec![Sl2::S, Sl2::T, Sl2::T.mul(&Sl2::S), Sl2::S.mul(&Sl2::T.inverse())]
}

pub fn modular(b: usize, all: bool) -> CliResult<Check> {
    let mut c = Check::new(4, "modular transformation");
    let split = signature_b2_lattice(b)?;
    let g0 = real_basis_map(&split)?;
    let (pairs, taus, gammas): (Vec<_>, Vec<_>, Vec<_>) = if all {
        (vec![(1, 2), (1, 1)], vec![Complex64::new(0.0, 1.0), Complex64::new(0.5, 1.0), Complex64::new(0.0, 2.0)], default_gammas())
    } else {
        (vec![(1, 2)], vec![Complex64::new(0.0, 1.0), Complex64::new(0.5, 1.0)], vec![Sl2::S, Sl2::T])
    };
    let rows = modular_rows(&split, &g0, &Isometry::identity(b + 2), &pairs, &taus, &gammas, 1e-14)?;
    let worst = rows.iter().map(|r| r.residual.residual).fold(0.0, f64::max);
    let tail = rows.iter().map(|r| r.residual.tail).fold(0.0, f64::max);
    c.metric("max residual", worst, MODULAR_RESIDUAL);
    c.metric("max tail", tail, MODULAR_TAIL);
    Ok(c.detail(format!("{} checks, max residual {worst:.1e}, max tail {tail:.1e}", rows.len())))
}

pub struct SplitRow {
    pub tau: Complex64,
    pub point: TubePoint,
    pub lhs: Complex64,
    pub rhs: Complex64,
}

pub fn split_rows(b: usize, alpha: usize, beta: usize, cases: usize, trunc: &Truncation, rng: &mut impl Rng) -> CliResult<Vec<SplitRow>> {
    let split = signature_b2_lattice(b)?;
    let g0 = real_basis_map(&split)?;
    let mut rows = vec![];
    for _ in 0..cases {
        let z = random_tube_point(b, rng);
        let g = psi(&z)?;
        let tau = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(1.5..2.5));
        let f = f_alpha_beta(&split, &g0, &g, alpha, beta, tau, trunc)?;
        let s = split_rhs(&split, &g0, &g, alpha, beta, tau, trunc)?;
        rows.push(SplitRow { tau, point: z, lhs: f.value, rhs: s.value });
    }
    Ok(rows)
}

pub fn splitting(b: usize, cases: usize, rng: &mut impl Rng) -> CliResult<Check> {
    let mut c = Check::new(5, "splitting");
    let trunc = Truncation { cd_bound: 15, r_bound: 8, ..Truncation::auto(1e-10) };
    let rows = split_rows(b, 1, 2, cases, &trunc, rng)?;
    let worst = rows.iter().map(|r| (r.lhs - r.rhs).norm()).fold(0.0, f64::max);
    c.metric("max |F − split|", worst, SPLIT_RESIDUAL);
    Ok(c.detail(format!("{cases} cases, max |F − split| = {worst:.1e}")))
}

pub fn unfold_config() -> AdaptiveConfig {
    AdaptiveConfig { order: 15, abs_tol: 1e-9, rel_tol: 1e-9, max_depth: 20 }
}

pub fn generic_unfolding(s_values: &[f64], coset_bound: i64, tol: f64) -> CliResult<(Check, Vec<(f64, UnfoldCheck)>)> {
    let mut c = Check::new(6, "generic unfolding");
    let mut rows = vec![];
    for &s in s_values {
        let r = generic_unfold_check(s, coset_bound, &unfold_config())?;
        c.metric(&format!("residual at s = {s}"), r.residual, tol);
        rows.push((s, r));
    }
    let detail = rows.iter().map(|(s, r)| format!("s={s}: {:.1e}", r.residual)).collect::<Vec<_>>().join(", ");
    Ok((c.detail(format!("cutoff {coset_bound}, {detail}")), rows))
}

pub fn bessel_grid() -> Check {
    let mut c = Check::new(7, "Bessel identity");
    let cfg = AdaptiveConfig { order: 20, abs_tol: 0.0, rel_tol: 1e-15, max_depth: 40 };
    let mut worst = 0.0f64;
    for s in [0.5f64, 1.5, 4.5] {
        for a in [0.3f64, 1.0, 5.0] {
            for bb in [0.3f64, 1.0, 5.0] {
                let peak = (bb / a).sqrt();
                let q = adaptive_log(|y| y.powf(s - 1.0) * (-a * y - bb / y).exp(), peak * 1e-4 * (bb / 80.0).min(1.0), peak * 1e4 + 150.0 / a, &cfg).value;
                worst = worst.max((q - bessel_integral(s, a, bb)).abs());
            }
        }
    }
    c.metric("max |quadrature − Bessel|", worst, BESSEL_GRID);
    c.detail(format!("27 grid points, max difference {worst:.1e}"))
}

/// Expansion of the strip integral at `x_samples` random X against
/// quadrature, for the c₁ = 1 surrogate.
pub fn expansion(b: usize, x_samples: usize, rng: &mut impl Rng) -> CliResult<Check> {
    let mut c = Check::new(8, "Fourier expansion");
    let split = signature_b2_lattice(b)?;
    let g0 = real_basis_map(&split)?;
    let f = CuspFormProxy::unit((b / 2 + 1) as i64, 1)?;
    let y = TubePoint::base(b).y;
    let xs: Vec<Vec<f64>> = (0..x_samples).map(|_| (0..b).map(|_| rng.gen_range(-0.5..0.5)).collect()).collect();
    let rep = expansion_vs_quadrature(&split, &g0, &f, 1, 2, &y, &xs, &Truncation::auto(1e-12), &StripConfig::default())?;
    c.metric("expansion residual", rep.max_residual, EXPANSION_RESIDUAL);
    Ok(c.detail(format!("{x_samples} X: residual {:.1e} (relative {:.1e})", rep.max_residual, rep.relative_residual)))
}

/// Bessel against quadrature evaluation of single coefficients on random
/// (λ, Z, α, β); every fourth λ is doubled to exercise the divisor sum.
pub fn coefficient_methods(b: usize, cases: usize, rng: &mut impl Rng) -> CliResult<Check> {
    let mut c = Check::new(8, "coefficient methods");
    let split = signature_b2_lattice(b)?;
    let g0 = real_basis_map(&split)?;
    let coeffs: Vec<Complex64> = (1..=12).map(|m| Complex64::new(1.0 / m as f64, 0.3 * (m as f64).sin())).collect();
    let f = CuspFormProxy::new((b / 2 + 1) as i64, coeffs)?;
    let (mut worst_abs, mut worst_rel) = (0.0f64, 0.0f64);
    for i in 0..cases {
        let z = random_tube_point(b, rng);
        let ctx = UnfoldContext::new(&split, &g0, &psi(&z)?, 1 + i % 3, 2 + i % 5)?;
        let mut lam = random_positive(&split, 12, rng);
        if i % 4 == 0 {
            lam = lam.scaled(2);
        }
        let x = fourier_coefficient(&ctx, &lam, &f, CoefficientMethod::Bessel)?.value;
        let y = fourier_coefficient(&ctx, &lam, &f, CoefficientMethod::Quadrature)?.value;
        worst_abs = worst_abs.max((x - y).norm());
        worst_rel = worst_rel.max((x - y).norm() / x.norm().max(f64::MIN_POSITIVE));
    }
    c.metric("max |Bessel − quadrature|", worst_abs, COEFFICIENT_METHODS);
    c.metric("max relative difference", worst_rel, COEFFICIENT_METHODS);
    Ok(c.detail(format!("{cases} cases: {worst_abs:.1e} (relative {worst_rel:.1e})")))
}

pub fn x_independence(b: usize, shifts: usize, constant_tail: f64, rng: &mut impl Rng) -> CliResult<Check> {
    let mut c = Check::new(9, "X-independence");
    let split = signature_b2_lattice(b)?;
    let g0 = real_basis_map(&split)?;
    let f = CuspFormProxy::new((b / 2 + 1) as i64, vec![Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.25), Complex64::new(0.2, 0.0)])?;
    let z = random_tube_point(b, rng);
    // q(λ) ≤ 3 keeps c_{q(λ)} inside the three surrogate coefficients
    let lams: Vec<LatticeVector> = (0..3).map(|_| random_positive(&split, 3, rng)).collect();
    let cfg = ConstantTermConfig { tail_target: constant_tail, ..ConstantTermConfig::default() };
    let ctx0 = UnfoldContext::new(&split, &g0, &psi(&z)?, 1, 2)?;
    let c0 = constant_term(&ctx0, &f, &cfg)?.value;
    let a0: Vec<Complex64> = lams.iter().map(|l| fourier_coefficient(&ctx0, l, &f, CoefficientMethod::Bessel).map(|r| r.value)).collect::<Result<_, _>>()?;
    let (mut dc, mut da) = (0.0f64, 0.0f64);
    for _ in 0..shifts {
        let xp: Vec<f64> = (0..b).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let ctx = UnfoldContext::new(&split, &g0, &psi(&z.translated(&xp))?, 1, 2)?;
        dc = dc.max((constant_term(&ctx, &f, &cfg)?.value - c0).norm());
        for (l, a) in lams.iter().zip(&a0) {
            da = da.max((fourier_coefficient(&ctx, l, &f, CoefficientMethod::Bessel)?.value - a).norm());
        }
    }
    c.metric("constant term |Δ|", dc, X_INDEPENDENCE);
    c.metric("coefficient |Δ|", da, X_INDEPENDENCE);
    Ok(c.detail(format!("{shifts} X′: constant term |Δ| {dc:.1e}, coefficients |Δ| {da:.1e}")))
}

pub fn certificate(b: usize, n: i64) -> CliResult<Check> {
    let mut c = Check::new(10, "injectivity certificate");
    let r = injectivity_certificate(n, b)?;
    let failed = r.steps.iter().filter(|s| !s.passed).count();
    let largest = r.steps.iter().map(|s| s.term_value).fold(f64::NEG_INFINITY, f64::max);
    c.metric("failed steps", failed as f64, 0.5);
    c.metric("largest witness term", largest, 0.0);
    Ok(c.detail(format!("{}/{n} steps pass, largest term {largest:.2e}", r.steps.len() - failed)))
}

/// Runs every check in order; `on_done` sees each result as it finishes.
pub fn run_all(b: usize, p: &Profile, seed: u64, mut on_done: impl FnMut(&Check, f64)) -> CliResult<Vec<Check>> {
    let mut out = vec![];
    let mut step = |c: CliResult<Check>, t: std::time::Instant| -> CliResult<()> {
        let c = c?;
        on_done(&c, t.elapsed().as_secs_f64());
        out.push(c);
        Ok(())
    };
    let now = std::time::Instant::now;
    let t = now();
    step(lattice_integrity(b), t)?;
    let t = now();
    step(decomposition(b, p.decompositions, &mut rng(seed, 2)), t)?;
    let t = now();
    step(theta_oracle(p.theta_cases, &mut rng(seed, 3)), t)?;
    let t = now();
    step(modular(b, p.modular_all), t)?;
    let t = now();
    step(splitting(b, p.split_cases, &mut rng(seed, 5)), t)?;
    let t = now();
    step(generic_unfolding(&p.unfold_s, 40, UNFOLD_RESIDUAL).map(|x| x.0), t)?;
    let t = now();
    step(Ok(bessel_grid()), t)?;
    let t = now();
    step(expansion(b, p.x_samples, &mut rng(seed, 8)), t)?;
    let t = now();
    step(coefficient_methods(b, p.coefficient_cases, &mut rng(seed, 18)), t)?;
    let t = now();
    step(x_independence(b, p.x_shifts, p.constant_tail, &mut rng(seed, 9)), t)?;
    let t = now();
    step(certificate(b, p.certificate_n), t)?;
    Ok(out)
}

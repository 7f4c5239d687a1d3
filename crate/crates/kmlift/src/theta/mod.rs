//! Truncated Siegel theta functions of lattices embedded in R^{p,q},
//! with shift vectors and polynomial insertions.

mod blocks;
pub mod coprime;
pub mod split;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Isometry;
use crate::lattice::{Ellipsoid, Lattice, RealBasisMap, SplitLattice};
use crate::polynomials::{heat_operator, CompiledPoly, HeatExpansion, MultiPoly};
use crate::quad::{adaptive, AdaptiveConfig};
use crate::sum::{ComplexSum, Neumaier};

pub use coprime::coprime_pairs;
pub use split::{f_alpha_beta, split_rhs, SplitReport};

/// e(x) = exp(2πi x).
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    Complex64::new(c, s)
}

/// Truncation parameters shared by the theta sums.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Truncation {
    /// Majorant-norm cutoff R²; a value ≤ 0 selects it from `tail_target`.
    pub radius: f64,
    pub cd_bound: i64,
    pub r_bound: i64,
    /// Requested bound on the discarded tail when the radius is automatic.
    pub tail_target: f64,
}

impl Truncation {
    pub fn auto(tail_target: f64) -> Self {
        Truncation { radius: 0.0, cd_bound: 15, r_bound: 8, tail_target }
    }

    pub fn with_radius(radius: f64) -> Self {
        Truncation { radius, cd_bound: 15, r_bound: 8, tail_target: 0.0 }
    }

    pub fn with_bounds(mut self, cd_bound: i64, r_bound: i64) -> Self {
        self.cd_bound = cd_bound;
        self.r_bound = r_bound;
        self
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Upper bound on the discarded terms.
    pub tail_estimate: f64,
    /// Σ |terms| over the retained points.
    pub abs_sum: f64,
    pub radius: f64,
    pub points: u64,
}

/// A lattice together with a linear map of its coordinates into an ambient
/// R^{p,q}: x = map · (λ + β) for λ in lattice coordinates.
#[derive(Clone, Debug)]
pub struct ThetaModel {
    pub gram: DMatrix<f64>,
    pub map: DMatrix<f64>,
    /// Ambient coordinates with index < p_amb are positive.
    pub p_amb: usize,
    pub signature: (usize, usize),
    majorant: DMatrix<f64>,
    ellipsoid: Ellipsoid,
}

impl ThetaModel {
    pub fn new(gram: DMatrix<f64>, map: DMatrix<f64>, p_amb: usize, signature: (usize, usize)) -> Result<Self> {
        if gram.nrows() != map.ncols() {
            return Err(Error::Dimension { expected: gram.nrows(), got: map.ncols() });
        }
        let majorant = map.transpose() * &map;
        let ellipsoid = Ellipsoid::new(&majorant, None)?;
        Ok(ThetaModel { gram, map, p_amb, signature, majorant, ellipsoid })
    }

    /// Θ_M for a lattice with model basis `basis` (its images in R^{p,q})
    /// and an isometry g of R^{p,q}.
    pub fn for_lattice(lattice: &Lattice, basis: &DMatrix<f64>, g: &Isometry) -> Result<Self> {
        let map = &g.matrix * basis;
        ThetaModel::new(lattice.gram_f64(), map, lattice.signature().0, lattice.signature())
    }

    /// Θ_L for the split lattice with g acting on R^{b,2}.
    pub fn l_model(split: &SplitLattice, g0: &RealBasisMap, g: &Isometry) -> Result<Self> {
        ThetaModel::new(split.l.gram_f64(), &g.matrix * &g0.matrix, split.b, split.l.signature())
    }

    /// Θ_K, with K mapped to R^{b,2} by the w-map matrix `w`.
    pub fn k_model(split: &SplitLattice, g0: &RealBasisMap, w: &DMatrix<f64>) -> Result<Self> {
        ThetaModel::new(split.k.gram_f64(), w * g0.k_block(split.b), split.b, split.k.signature())
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn ambient(&self) -> usize {
        self.map.nrows()
    }

    pub fn majorant_gram(&self) -> &DMatrix<f64> {
        &self.majorant
    }

    fn ellipsoid_at(&self, beta: &[f64]) -> Result<Ellipsoid> {
        if beta.iter().all(|&v| v == 0.0) {
            return Ok(self.ellipsoid.clone());
        }
        let center: Vec<f64> = beta.iter().map(|v| -v).collect();
        Ellipsoid::new(&self.majorant, Some(&center))
    }

    /// Visit every λ with |map(λ + β)|² ≤ radius. Work is split over the last
    /// coordinate; one accumulator per slab is returned, in slab order.
    pub fn fold_points<A, I, F>(&self, beta: &[f64], radius: f64, init: I, f: F) -> Result<Vec<A>>
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &[i64], &[f64]) + Sync + Send,
    {
        if beta.len() != self.rank() {
            return Err(Error::Dimension { expected: self.rank(), got: beta.len() });
        }
        let ell = self.ellipsoid_at(beta)?;
        let offset: Vec<f64> = (0..self.ambient()).map(|i| (0..self.rank()).map(|j| self.map[(i, j)] * beta[j]).sum()).collect();
        let tops = ell.top_values(radius);
        Ok(crate::par::map_ordered(&tops, |&top| {
            let mut acc = init();
            ell.for_each_with_top(top, radius, Some((&self.map, &offset)), |c, _, x| f(&mut acc, c, x));
            acc
        }))
    }

    /// Crude lattice-point count bound N(ρ) ≤ V_n (ρ + δ)^n / covol in the
    /// majorant metric, with δ a covering-radius bound.
    fn count_bound(&self) -> impl Fn(f64) -> f64 {
        let n = self.rank();
        let chol = nalgebra::Cholesky::new(self.majorant.clone()).expect("positive definite");
        let l = chol.l();
        let diag: Vec<f64> = (0..n).map(|i| l[(i, i)]).collect();
        let covol: f64 = diag.iter().product();
        let delta = 0.5 * diag.iter().map(|r| r * r).sum::<f64>().sqrt();
        let nf = n as f64;
        let vn = PI.powf(nf / 2.0) / crate::special::gamma(nf / 2.0 + 1.0);
        move |rho| vn * (rho + delta).powf(nf) / covol
    }

    /// Bound on Σ_{|x|² > radius} C_H (1+|x|)^d e^{−πy|x|²} via
    /// ∫_R^∞ |f′(ρ)| N(ρ) dρ.
    pub fn tail_bound(&self, y: f64, size: (f64, i32), radius: f64) -> f64 {
        let (ch, d) = size;
        if ch == 0.0 {
            return 0.0;
        }
        let r0 = radius.max(0.0).sqrt();
        let count = self.count_bound();
        let df = d as f64;
        let integrand = |rho: f64| {
            let g = (-PI * y * rho * rho).exp() * (1.0 + rho).powf((df - 1.0).max(0.0));
            ch * g * (2.0 * PI * y * rho * (1.0 + rho) + df) * count(rho)
        };
        let width = (60.0 / (PI * y)).sqrt() + 2.0;
        let cfg = AdaptiveConfig { order: 20, abs_tol: 1e-300, rel_tol: 1e-8, max_depth: 20 };
        adaptive(integrand, r0, r0 + width, &cfg).value
    }

    /// Smallest radius (to bisection accuracy) with tail_bound ≤ target.
    pub fn auto_radius(&self, y: f64, size: (f64, i32), target: f64) -> f64 {
        if size.0 == 0.0 {
            return 1.0;
        }
        let mut hi = 1.0;
        while self.tail_bound(y, size, hi * hi) > target {
            hi *= 1.5;
            if hi > 1e4 {
                break;
            }
        }
        let mut lo = 0.0;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if self.tail_bound(y, size, mid * mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi * hi
    }

    /// Lattice coordinates of an ambient vector lying in the image:
    /// Gram⁻¹ mapᵀ J v, with J the ambient signature.
    pub fn lattice_coords(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.rank();
        let gi = self.gram.clone().try_inverse().ok_or_else(|| Error::Degenerate("singular Gram".into()))?;
        let pair: Vec<f64> = (0..n)
            .map(|j| {
                (0..self.ambient())
                    .map(|i| {
                        let s = if i < self.p_amb { 1.0 } else { -1.0 };
                        self.map[(i, j)] * s * v[i]
                    })
                    .sum()
            })
            .collect();
        Ok((0..n).map(|i| (0..n).map(|j| gi[(i, j)] * pair[j]).sum()).collect())
    }
}

/// Σ_m ν^m ‖c_m‖₁ and the maximal degree, ν = 1/(4πy).
pub fn heat_size(heat: &[CompiledPoly], y: f64) -> (f64, i32) {
    let nu = 1.0 / (4.0 * PI * y);
    let mut c = 0.0;
    let mut d = 0;
    let mut pw = 1.0;
    for h in heat {
        let (s, dd) = h.size();
        c += pw * s;
        d = d.max(dd);
        pw *= nu;
    }
    (c, d)
}

/// Per-point data shared by all theta sums: the Gaussian, the phase from
/// Re τ, and q(x) with the signature split of the ambient space.
#[inline]
pub(crate) fn gaussian_phase(x: &[f64], p_amb: usize, tau: Complex64) -> (f64, f64) {
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (i, v) in x.iter().enumerate() {
        if i < p_amb {
            pos += v * v;
        } else {
            neg += v * v;
        }
    }
    let gauss = (-PI * tau.im * (pos + neg)).exp();
    (gauss, tau.re * 0.5 * (pos - neg))
}

#[inline]
pub(crate) fn eval_heat(heat: &[CompiledPoly], nu: f64, x: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut pw = 1.0;
    for h in heat {
        s += pw * h.eval(x);
        pw *= nu;
    }
    s
}

/// Direct truncated sum
/// Σ_λ H(x) e(τ q(x₊) + τ̄ q(x₋) − (λ + β/2, α)), x = map(λ + β),
/// where H = Σ_m ν^m heat[m].
pub fn theta_direct(
    model: &ThetaModel,
    tau: Complex64,
    alpha: &[f64],
    beta: &[f64],
    heat: &[CompiledPoly],
    radius: f64,
) -> Result<ThetaValue> {
    if !(tau.im > 0.0) {
        return Err(Error::Invalid("Im tau must be positive".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::Invalid("truncation radius must be positive".into()));
    }
    let n = model.rank();
    if alpha.len() != n {
        return Err(Error::Dimension { expected: n, got: alpha.len() });
    }
    let a_pair: Vec<f64> = (0..n).map(|i| (0..n).map(|j| model.gram[(i, j)] * alpha[j]).sum()).collect();
    let half_ba: f64 = 0.5 * beta.iter().zip(&a_pair).map(|(b, a)| b * a).sum::<f64>();
    let nu = 1.0 / (4.0 * PI * tau.im);
    let p_amb = model.p_amb;
    let parts = model.fold_points(
        beta,
        radius,
        || (ComplexSum::new(), Neumaier::new(), 0u64),
        |acc, c, x| {
            let h = eval_heat(heat, nu, x);
            let (gauss, re_phase) = gaussian_phase(x, p_amb, tau);
            let lam_a: f64 = c.iter().zip(&a_pair).map(|(&ci, a)| ci as f64 * a).sum();
            let t = e(re_phase - lam_a - half_ba) * (h * gauss);
            acc.0.add(t);
            acc.1.add(h.abs() * gauss);
            acc.2 += 1;
        },
    )?;
    let mut total = ComplexSum::new();
    let mut abs = Neumaier::new();
    let mut points = 0;
    for (s, a, k) in &parts {
        total.merge(s);
        abs.merge(a);
        points += k;
    }
    let tail = model.tail_bound(tau.im, heat_size(heat, tau.im), radius);
    Ok(ThetaValue { value: total.value(), tail_estimate: tail, abs_sum: abs.value(), radius, points })
}

/// Which Laplacian the heat operator uses.
#[derive(Clone, Debug)]
pub enum HeatLaplacian {
    /// Σ_j ∂²/∂x_j² over all ambient coordinates.
    Ambient,
    /// The Laplacian of the subspace with Euclidean projector Π, realized as
    /// the ambient Laplacian of P∘Π.
    Projected(Vec<Vec<f64>>),
}

/// Inputs of Θ_M(τ, α, β, g, P); g is folded into `model`. Shifts are in
/// lattice coordinates.
#[derive(Clone, Debug)]
pub struct ThetaInput {
    pub model: ThetaModel,
    pub tau: Complex64,
    pub alpha_shift: Vec<f64>,
    pub beta_shift: Vec<f64>,
    pub poly: MultiPoly<f64>,
    pub laplacian: HeatLaplacian,
    pub truncation: Truncation,
}

impl ThetaInput {
    pub fn new(model: ThetaModel, tau: Complex64, poly: MultiPoly<f64>, truncation: Truncation) -> Self {
        let n = model.rank();
        ThetaInput {
            model,
            tau,
            alpha_shift: vec![0.0; n],
            beta_shift: vec![0.0; n],
            poly,
            laplacian: HeatLaplacian::Ambient,
            truncation,
        }
    }

    pub fn with_shifts(mut self, alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        self.alpha_shift = alpha;
        self.beta_shift = beta;
        self
    }

    pub fn heat(&self) -> HeatExpansion<f64> {
        match &self.laplacian {
            HeatLaplacian::Ambient => heat_operator(&self.poly),
            HeatLaplacian::Projected(pi) => heat_operator(&self.poly.substitute_linear(pi)),
        }
    }
}

/// Θ_M(τ, α, β, g, P), factorized over orthogonal blocks when the model
/// allows it.
pub fn siegel_theta(input: &ThetaInput) -> Result<ThetaValue> {
    if input.poly.nvars() != input.model.ambient() {
        return Err(Error::Dimension { expected: input.model.ambient(), got: input.poly.nvars() });
    }
    if !(input.tau.im > 0.0) {
        return Err(Error::Invalid("Im tau must be positive".into()));
    }
    if input.truncation.radius <= 0.0 && !(input.truncation.tail_target > 0.0) {
        return Err(Error::Invalid("truncation needs a positive radius or tail target".into()));
    }
    if input.poly.is_zero() {
        return Ok(ThetaValue { value: Complex64::new(0.0, 0.0), tail_estimate: 0.0, abs_sum: 0.0, radius: 0.0, points: 0 });
    }
    if matches!(input.laplacian, HeatLaplacian::Ambient) {
        let parts = blocks::find_blocks(&input.model);
        if parts.len() > 1 {
            return blocks::theta_blocks(input, &parts);
        }
    }
    let heat = input.heat().compile();
    let radius = if input.truncation.radius > 0.0 {
        input.truncation.radius
    } else {
        input.model.auto_radius(input.tau.im, heat_size(&heat, input.tau.im), input.truncation.tail_target)
    };
    theta_direct(&input.model, input.tau, &input.alpha_shift, &input.beta_shift, &heat, radius)
}

/// γ = (a b; c d) ∈ SL₂(Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Sl2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(Error::NotSl2z);
        }
        Ok(Sl2 { a, b, c, d })
    }

    pub const IDENTITY: Sl2 = Sl2 { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Sl2 = Sl2 { a: 0, b: -1, c: 1, d: 0 };
    pub const T: Sl2 = Sl2 { a: 1, b: 1, c: 0, d: 1 };

    pub fn mul(&self, o: &Sl2) -> Sl2 {
        Sl2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Sl2 {
        Sl2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn act(&self, tau: Complex64) -> Complex64 {
        (tau * self.a as f64 + self.b as f64) / (tau * self.c as f64 + self.d as f64)
    }
}

/// Outcome of a modular transformation check.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModularResidual {
    pub residual: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// Combined truncation bound of both sides.
    pub tail: f64,
}

/// |Θ(γτ, aα+bβ, cα+dβ) − (cτ+d)^{b⁺/2+m⁺}(cτ̄+d)^{b⁻/2+m⁻} Θ(τ, α, β)|.
pub fn modular_check(input: &ThetaInput, gamma: &Sl2) -> Result<ModularResidual> {
    Sl2::new(gamma.a, gamma.b, gamma.c, gamma.d)?;
    let (mp, mm) = input
        .poly
        .split_degree(input.model.p_amb)
        .ok_or_else(|| Error::Invalid("polynomial is not bihomogeneous".into()))?;
    let (bp, bm) = input.model.signature;
    let tau = input.tau;
    let ct = tau * gamma.c as f64 + gamma.d as f64;
    let ctb = tau.conj() * gamma.c as f64 + gamma.d as f64;
    let factor = pow_weight(ct, bp as f64 / 2.0 + mp as f64) * pow_weight(ctb, bm as f64 / 2.0 + mm as f64);
    let rhs = siegel_theta(input)?;
    let mut moved = input.clone();
    moved.tau = gamma.act(tau);
    moved.alpha_shift = lin2(gamma.a, &input.alpha_shift, gamma.b, &input.beta_shift);
    moved.beta_shift = lin2(gamma.c, &input.alpha_shift, gamma.d, &input.beta_shift);
    let lhs = siegel_theta(&moved)?;
    let r = factor * rhs.value;
    Ok(ModularResidual {
        residual: (lhs.value - r).norm(),
        lhs: lhs.value,
        rhs: r,
        tail: lhs.tail_estimate + factor.norm() * rhs.tail_estimate,
    })
}

fn lin2(s: i64, a: &[f64], t: i64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| s as f64 * x + t as f64 * y).collect()
}

/// z^k, exact repeated multiplication for integral k, principal branch
/// otherwise.
pub fn pow_weight(z: Complex64, k: f64) -> Complex64 {
    if k.fract() == 0.0 && k.abs() < 64.0 {
        let mut r = Complex64::new(1.0, 0.0);
        for _ in 0..k.abs() as i32 {
            r *= z;
        }
        if k < 0.0 {
            r.inv()
        } else {
            r
        }
    } else {
        z.powf(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::hyperbolic_plane;

    fn u_model() -> ThetaModel {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let basis = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
        ThetaModel::for_lattice(&hyperbolic_plane(), &basis, &Isometry::identity(2)).unwrap()
    }

    #[test]
    fn t_invariance_zero_shift() {
        let m = u_model();
        let one = MultiPoly::constant(2, 1.0);
        let a = siegel_theta(&ThetaInput::new(m.clone(), Complex64::new(0.2, 1.1), one.clone(), Truncation::auto(1e-14)))
            .unwrap();
        let b = siegel_theta(&ThetaInput::new(m, Complex64::new(1.2, 1.1), one, Truncation::auto(1e-14))).unwrap();
        assert!((a.value - b.value).norm() < 1e-12);
    }

    #[test]
    fn zero_poly_gives_zero() {
        let m = u_model();
        let v = siegel_theta(&ThetaInput::new(m, Complex64::new(0.0, 1.0), MultiPoly::zero(2), Truncation::auto(1e-12)))
            .unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn tail_bound_decreases() {
        let m = u_model();
        let a = m.tail_bound(1.0, (1.0, 0), 4.0);
        let b = m.tail_bound(1.0, (1.0, 0), 9.0);
        assert!(b < a && b > 0.0);
        let r = m.auto_radius(1.0, (1.0, 0), 1e-10);
        assert!(m.tail_bound(1.0, (1.0, 0), r) <= 1e-10 * 1.0001);
    }

    #[test]
    fn sl2_products() {
        let ts = Sl2::T.mul(&Sl2::S);
        assert_eq!(ts, Sl2 { a: 1, b: -1, c: 1, d: 0 });
        assert_eq!(Sl2::S.mul(&Sl2::S.inverse()), Sl2::IDENTITY);
        assert!(Sl2::new(1, 1, 1, 1).is_err());
    }
}

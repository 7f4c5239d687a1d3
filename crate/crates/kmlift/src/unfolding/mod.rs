//! Unfolded integrals of theta lifts: the auxiliary function h_{αβ}, the
//! Fourier coefficients of the defining integrals, their constant term, and
//! a check of the unfolding identity on a model function.

mod constant;
mod generic;
mod strip;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Isometry, PointFrame};
use crate::lattice::{vector_divisors, LatticeVector, RealBasisMap, SplitLattice};
use crate::polynomials::{decompose_exact, CompiledPoly, ExactFrame};
use crate::quad::{adaptive_log, AdaptiveConfig};
use crate::special::bessel_integral;
use crate::sum::ComplexSum;
use crate::theta::split::k_coords;
use crate::theta::{e, gaussian_phase, heat_size, ThetaModel, Truncation};

pub use constant::{constant_term, ConstantTerm, ConstantTermConfig};
pub use generic::{generic_unfold_check, UnfoldCheck};
pub use strip::{expansion_vs_quadrature, fourier_series, strip_integral, ExpansionReport, StripConfig};

/// Stand-in for a cusp form f(τ) = Σ_{n≥1} c_n e(nτ), truncated at N_max.
/// Evaluation drops Σ_{n>N_max}, of size about exp(−2π N_max y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspFormProxy {
    pub weight: i64,
    /// c_1, …, c_{N_max}.
    pub coefficients: Vec<Complex64>,
}

impl CuspFormProxy {
    pub fn new(weight: i64, coefficients: Vec<Complex64>) -> Result<Self> {
        if weight <= 0 || weight % 2 != 0 {
            return Err(Error::Invalid(format!("weight {weight} is not a positive even integer")));
        }
        Ok(CuspFormProxy { weight, coefficients })
    }

    /// c_{n0} = 1, all other coefficients zero.
    pub fn unit(weight: i64, n0: usize) -> Result<Self> {
        if n0 == 0 {
            return Err(Error::Invalid("cusp forms have no c_0".into()));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); n0];
        c[n0 - 1] = Complex64::new(1.0, 0.0);
        CuspFormProxy::new(weight, c)
    }

    pub fn zero(weight: i64) -> Self {
        CuspFormProxy { weight, coefficients: vec![] }
    }

    pub fn n_max(&self) -> usize {
        self.coefficients.len()
    }

    /// c_m, zero when m is out of range.
    pub fn coefficient(&self, m: i64) -> Complex64 {
        if m >= 1 && (m as usize) <= self.coefficients.len() {
            self.coefficients[m as usize - 1]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let q = e(tau.re) * (-2.0 * PI * tau.im).exp();
        let mut pw = q;
        let mut s = ComplexSum::new();
        for c in &self.coefficients {
            s.add(c * pw);
            pw *= q;
        }
        s.value()
    }

    pub fn truncation_error(&self, y: f64) -> f64 {
        (-2.0 * PI * self.n_max() as f64 * y).exp()
    }

    /// Σ |c_n| e^{−2πny}.
    pub fn abs_bound(&self, y: f64) -> f64 {
        self.coefficients.iter().enumerate().map(|(i, c)| c.norm() * (-2.0 * PI * (i + 1) as f64 * y).exp()).sum()
    }

    pub fn add(&self, o: &CuspFormProxy) -> Result<CuspFormProxy> {
        if self.weight != o.weight {
            return Err(Error::Invalid("weights differ".into()));
        }
        let n = self.n_max().max(o.n_max());
        let c = (1..=n as i64).map(|m| self.coefficient(m) + o.coefficient(m)).collect();
        CuspFormProxy::new(self.weight, c)
    }
}

/// Everything the unfolded integrals need from (g, α, β): the frame of
/// z = g⁻¹(z0), the w-map model of K and the heat expansions of the pieces
/// p_{(α,β),w,h,0}.
#[derive(Clone, Debug)]
pub struct UnfoldContext {
    pub split: SplitLattice,
    pub g0: RealBasisMap,
    pub g: Isometry,
    pub alpha: usize,
    pub beta: usize,
    pub frame: PointFrame,
    pub model: ThetaModel,
    pub heats: [Vec<CompiledPoly>; 3],
    pub u_zperp_norm2: f64,
    /// μ_K in lattice coordinates of K.
    pub mu: Vec<f64>,
}

impl UnfoldContext {
    pub fn new(split: &SplitLattice, g0: &RealBasisMap, g: &Isometry, alpha: usize, beta: usize) -> Result<Self> {
        let frame = PointFrame::from_isometry(g)?;
        let w = frame.w_matrix(g)?;
        let model = ThetaModel::k_model(split, g0, &w)?;
        let ef = ExactFrame::<f64>::from_isometry(&g.to_rows())?;
        let dec = decompose_exact(alpha, beta, &ef)?;
        let [h0, h1, h2] = dec.heat_on_image(&ef);
        let uzp2 = ef.u_zperp_norm2;
        if !(uzp2 > 0.0) {
            return Err(Error::Degenerate("u_{z⊥} is zero".into()));
        }
        let mu = k_coords(split, g0, &frame.mu_k)?;
        Ok(UnfoldContext {
            split: split.clone(),
            g0: g0.clone(),
            g: g.clone(),
            alpha,
            beta,
            frame,
            model,
            heats: [h0.compile(), h1.compile(), h2.compile()],
            u_zperp_norm2: uzp2,
            mu,
        })
    }

    pub fn b(&self) -> usize {
        self.split.b
    }

    /// x = g0∘w(λ) for λ in lattice coordinates of K.
    pub fn image(&self, lam: &[f64]) -> Vec<f64> {
        let m = &self.model.map;
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * lam[j]).sum()).collect()
    }

    /// λ_{w⊥}² = |x₊|² for x = g0∘w(λ).
    pub fn w_perp_norm2(&self, x: &[f64]) -> f64 {
        x[..self.b()].iter().map(|v| v * v).sum()
    }

    /// (λ, μ_K) for λ in lattice coordinates.
    pub fn pairing_mu(&self, lam: &[f64]) -> f64 {
        let g = &self.model.gram;
        let n = lam.len();
        (0..n).map(|i| (0..n).map(|j| lam[i] * g[(i, j)] * self.mu[j]).sum::<f64>()).sum()
    }

    /// Values of the heat-expansion coefficient polynomials of p_h at x.
    pub(crate) fn heat_values(&self, h: usize, x: &[f64]) -> Vec<f64> {
        self.heats[h].iter().map(|p| p.eval(x)).collect()
    }
}

/// Σ_{r≥1} Σ_{h=0}^{2} (r/2iy)^h exp(−πr²/(2y u_{z⊥}²)) conj Θ_K(τ, rμ, 0, w, p_h),
/// with the lattice tail bound.
pub fn h_series(tau: Complex64, ctx: &UnfoldContext, trunc: &Truncation) -> Result<(Complex64, f64)> {
    let y = tau.im;
    if !(y > 0.0) {
        return Err(Error::Invalid("Im tau must be positive".into()));
    }
    let uzp2 = ctx.u_zperp_norm2;
    // conj(w Θ) summed as conj(Σ conj(w) Θ)
    let mut members = Vec::new();
    for r in 1..=trunc.r_bound {
        let ex = (-PI * (r * r) as f64 / (2.0 * y * uzp2)).exp();
        if ex < crate::theta::split::SPLIT_SKIP {
            break;
        }
        let f = Complex64::new(0.0, -(r as f64) / (2.0 * y));
        let ws = [Complex64::new(ex, 0.0), f * ex, f * f * ex];
        members.push((r as f64, [ws[0].conj(), ws[1].conj(), ws[2].conj()]));
    }
    if members.is_empty() {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let sizes: Vec<(f64, i32)> = ctx.heats.iter().map(|h| heat_size(h, y)).collect();
    let mut size = (0.0, 0);
    for (_, ws) in &members {
        for h in 0..3 {
            size.0 += ws[h].norm() * sizes[h].0;
            size.1 = size.1.max(sizes[h].1);
        }
    }
    let model = &ctx.model;
    let radius = if trunc.radius > 0.0 { trunc.radius } else { model.auto_radius(y, size, trunc.tail_target) };
    let nu = 1.0 / (4.0 * PI * y);
    let b = ctx.b();
    let mu_pair: Vec<f64> = (0..b).map(|i| (0..b).map(|j| model.gram[(i, j)] * ctx.mu[j]).sum()).collect();
    let parts = model.fold_points(&vec![0.0; b], radius, ComplexSum::new, |acc, c, x| {
        let (gauss, re_phase) = gaussian_phase(x, model.p_amb, tau);
        let hv = [
            crate::theta::eval_heat(&ctx.heats[0], nu, x),
            crate::theta::eval_heat(&ctx.heats[1], nu, x),
            crate::theta::eval_heat(&ctx.heats[2], nu, x),
        ];
        let s: f64 = c.iter().zip(&mu_pair).map(|(&ci, p)| ci as f64 * p).sum();
        let mut t = Complex64::new(0.0, 0.0);
        for (r, ws) in &members {
            t += (ws[0] * hv[0] + ws[1] * hv[1] + ws[2] * hv[2]) * e(-r * s);
        }
        acc.add(t * e(re_phase) * gauss);
    })?;
    let mut total = ComplexSum::new();
    for p in &parts {
        total.merge(p);
    }
    Ok((total.value().conj(), model.tail_bound(y, size, radius)))
}

/// h_{αβ}(τ) = y^{k+1/2} f(τ)/(√2|u_{z⊥}|) · h_series(τ).
pub fn h_alpha_beta(tau: Complex64, ctx: &UnfoldContext, f: &CuspFormProxy, trunc: &Truncation) -> Result<Complex64> {
    if f.coefficients.iter().all(|c| c.norm() == 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (s, _) = h_series(tau, ctx, trunc)?;
    let y = tau.im;
    let pre = y.powf(f.weight as f64 + 0.5) / (2.0 * ctx.u_zperp_norm2).sqrt();
    Ok(f.eval(tau) * s * pre)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMethod {
    Bessel,
    Quadrature,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CoefficientTerm {
    pub h: usize,
    pub t: u64,
    pub value: Complex64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourierCoefficientResult {
    pub lambda: LatticeVector,
    pub value: Complex64,
    pub terms: Vec<CoefficientTerm>,
    pub method: CoefficientMethod,
}

/// ∫_0^∞ y^{k−h−3/2} exp(−A y − B/y) H(y) dy with H = Σ_m (4πy)^{−m} heat[m].
fn y_integral(k: i64, h: usize, a: f64, bb: f64, heat: &[f64], method: CoefficientMethod) -> f64 {
    let s0 = k as f64 - h as f64 - 0.5;
    match method {
        CoefficientMethod::Bessel => heat
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(m, v)| v * (4.0 * PI).powi(-(m as i32)) * bessel_integral(s0 - m as f64, a, bb))
            .sum(),
        CoefficientMethod::Quadrature => {
            // the integrand peaks near √(B/A); the window leaves e^{−700}
            let peak = (bb / a).sqrt();
            let lo = (peak * 1e-6).min(bb / 700.0);
            let hi = (peak * 1e6).max(700.0 / a + 10.0 * s0.abs() / a);
            let cfg = AdaptiveConfig { order: 20, abs_tol: 1e-300, rel_tol: 1e-13, max_depth: 40 };
            adaptive_log(
                |y| {
                    let nu = 1.0 / (4.0 * PI * y);
                    let mut hv = 0.0;
                    let mut pw = 1.0;
                    for v in heat {
                        hv += pw * v;
                        pw *= nu;
                    }
                    y.powf(s0 - 1.0) * (-a * y - bb / y).exp() * hv
                },
                lo,
                hi,
                &cfg,
            )
            .value
        }
    }
}

/// Fourier coefficient of the defining integral at λ ∈ K:
/// √2/|u_{z⊥}| Σ_h Σ_{t|λ} (t/2i)^h c_{q(λ)/t²}(f) I(h, t).
pub fn fourier_coefficient(
    ctx: &UnfoldContext,
    lambda: &LatticeVector,
    f: &CuspFormProxy,
    method: CoefficientMethod,
) -> Result<FourierCoefficientResult> {
    let b = ctx.b();
    if lambda.coords.len() != b {
        return Err(Error::Dimension { expected: b, got: lambda.coords.len() });
    }
    if lambda.is_zero() {
        return Err(Error::Invalid("λ = 0 is the constant term; use constant_term".into()));
    }
    let q = ctx.split.k.quadratic_form(lambda)?;
    let mut out = FourierCoefficientResult { lambda: lambda.clone(), value: Complex64::new(0.0, 0.0), terms: vec![], method };
    if *q.numer() <= 0 {
        return Ok(out);
    }
    let q = q.to_integer();
    let uzp2 = ctx.u_zperp_norm2;
    let pre = (2.0 / uzp2).sqrt();
    let mut total = ComplexSum::new();
    for t in vector_divisors(lambda)? {
        let tf = t as f64;
        let c = f.coefficient(q / (t * t) as i64);
        if c.norm() == 0.0 {
            continue;
        }
        let lam_t: Vec<f64> = lambda.coords.iter().map(|&v| v as f64 / tf).collect();
        let x = ctx.image(&lam_t);
        let a = 2.0 * PI * ctx.w_perp_norm2(&x);
        let bb = PI * tf * tf / (2.0 * uzp2);
        let mut ph = Complex64::new(1.0, 0.0);
        for h in 0..3 {
            let hv = ctx.heat_values(h, &x);
            let v = ph * c * (pre * y_integral(f.weight, h, a, bb, &hv, method));
            out.terms.push(CoefficientTerm { h, t, value: v });
            total.add(v);
            ph *= Complex64::new(0.0, -tf / 2.0);
        }
    }
    out.value = total.value();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{psi, TubePoint};
    use crate::lattice::{real_basis_map, signature_b2_lattice};

    fn ctx() -> UnfoldContext {
        let split = signature_b2_lattice(10).unwrap();
        let g0 = real_basis_map(&split).unwrap();
        let mut z = TubePoint::base(10);
        z.x[1] = 0.2;
        z.x[4] = -0.1;
        z.y[2] = 0.1;
        UnfoldContext::new(&split, &g0, &psi(&z).unwrap(), 1, 2).unwrap()
    }

    #[test]
    fn proxy_basics() {
        let f = CuspFormProxy::unit(6, 2).unwrap();
        assert_eq!(f.coefficient(2), Complex64::new(1.0, 0.0));
        assert_eq!(f.coefficient(3), Complex64::new(0.0, 0.0));
        let tau = Complex64::new(0.1, 0.7);
        assert!((f.eval(tau) - (Complex64::new(0.0, 4.0 * PI) * tau).exp()).norm() < 1e-15);
        assert!(CuspFormProxy::new(5, vec![]).is_err());
        assert!(CuspFormProxy::unit(6, 0).is_err());
    }

    #[test]
    fn coefficient_support() {
        let c = ctx();
        let f = CuspFormProxy::new(6, vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        // isotropic and negative vectors carry nothing
        let iso = LatticeVector::new(vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 0]);
        let neg = LatticeVector::new(vec![0, 0, 0, 0, 0, 0, 0, 0, 1, -1]);
        for v in [iso, neg] {
            let r = fourier_coefficient(&c, &v, &f, CoefficientMethod::Bessel).unwrap();
            assert_eq!(r.value, Complex64::new(0.0, 0.0));
        }
        assert!(fourier_coefficient(&c, &LatticeVector::new(vec![0; 10]), &f, CoefficientMethod::Bessel).is_err());
    }

    #[test]
    fn divisor_sum_and_methods() {
        let c = ctx();
        let f = CuspFormProxy::new(6, vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        let lam0 = c.split.represent_integer(1).unwrap();
        let lam = lam0.scaled(2);
        let r = fourier_coefficient(&c, &lam, &f, CoefficientMethod::Bessel).unwrap();
        let ts: std::collections::BTreeSet<u64> = r.terms.iter().map(|t| t.t).collect();
        assert_eq!(ts.into_iter().collect::<Vec<_>>(), vec![1, 2]);
        let sum: Complex64 = r.terms.iter().map(|t| t.value).sum();
        assert!((sum - r.value).norm() <= 1e-15 * r.value.norm().max(1e-300));
        let rq = fourier_coefficient(&c, &lam, &f, CoefficientMethod::Quadrature).unwrap();
        assert!((r.value - rq.value).norm() <= 1e-9 * r.value.norm(), "{} vs {}", r.value, rq.value);
    }

    #[test]
    fn h_is_translation_invariant() {
        let c = ctx();
        let f = CuspFormProxy::new(6, vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        let tr = Truncation::auto(1e-13);
        let t1 = Complex64::new(0.23, 0.9);
        let a = h_alpha_beta(t1, &c, &f, &tr).unwrap();
        let b = h_alpha_beta(t1 + 1.0, &c, &f, &tr).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm().max(1.0), "{a} vs {b}");
        assert_eq!(h_alpha_beta(t1, &c, &CuspFormProxy::zero(6), &tr).unwrap(), Complex64::new(0.0, 0.0));
    }
}

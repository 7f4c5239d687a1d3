//! Sparse multivariate polynomials over an exact or floating coefficient
//! field, the polynomials 2x_αx_β, the heat operator and the decomposition
//! of P(α,β)∘g along the w-map.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::Coeff;
use crate::geometry::{Isometry, PointFrame};

/// Polynomial in `nvars` variables, keyed by exponent vectors.
#[derive(Clone, PartialEq, Debug)]
pub struct MultiPoly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function x_i (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, C::one());
        p
    }

    /// Σ_j a_j x_j.
    pub fn linear(coeffs: &[C]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (j, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[j] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    fn add_term(&mut self, e: Vec<u32>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&C::one().neg()))
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c.mul(s));
        }
        p
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut p = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1.mul(c2));
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::constant(self.nvars, C::one());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// (m⁺, m⁻): degrees in the first `p` and in the remaining variables,
    /// or None unless the polynomial is bihomogeneous.
    pub fn split_degree(&self, p: usize) -> Option<(u32, u32)> {
        let mut it = self.terms.keys().map(|e| (e[..p].iter().sum::<u32>(), e[p..].iter().sum::<u32>()));
        let first = it.next()?;
        if it.all(|d| d == first) {
            Some(first)
        } else {
            None
        }
    }

    /// ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            p.add_term(f, c.mul(&C::from_i64(e[i] as i64)));
        }
        p
    }

    /// Directional derivative Σ_i d_i ∂/∂x_i.
    pub fn directional(&self, d: &[C]) -> Self {
        let mut p = Self::zero(self.nvars);
        for (i, di) in d.iter().enumerate() {
            if !di.is_zero() {
                p = p.add(&self.derivative(i).scale(di));
            }
        }
        p
    }

    /// Euclidean Laplacian Σ_j ∂²/∂x_j² over all variables.
    pub fn laplacian(&self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            for i in 0..self.nvars {
                if e[i] < 2 {
                    continue;
                }
                let mut f = e.clone();
                f[i] -= 2;
                p.add_term(f, c.mul(&C::from_i64((e[i] * (e[i] - 1)) as i64)));
            }
        }
        p
    }

    /// P(M v) as a polynomial in v, where x_i = Σ_j M_ij v_j.
    pub fn substitute_linear(&self, m: &[Vec<C>]) -> Self {
        assert_eq!(m.len(), self.nvars);
        let nv = m.first().map_or(0, |r| r.len());
        let lin: Vec<MultiPoly<C>> = m.iter().map(|row| MultiPoly::linear(row)).collect();
        let mut powers: Vec<Vec<MultiPoly<C>>> = lin.iter().map(|l| vec![MultiPoly::constant(nv, C::one()), l.clone()]).collect();
        let mut out = Self::zero(nv);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(nv, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&lin[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][k as usize]);
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_f64();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powi(k as i32);
                }
            }
            s += t;
        }
        s
    }

    pub fn to_f64(&self) -> MultiPoly<f64> {
        MultiPoly::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), c.to_f64())))
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let f: Vec<(usize, i32)> =
                        e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k as i32)).collect();
                    (c.to_f64(), f)
                })
                .collect(),
        }
    }

    /// Maximum absolute difference of coefficients against another
    /// polynomial, in floating point.
    pub fn max_coeff_diff(&self, o: &Self) -> f64 {
        self.sub(o).terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl<C: Coeff> fmt::Display for MultiPoly<C> {
    /// Canonical sparse text: "c * x1^a1 * x2 + …", sorted by exponent vector.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let mut s = c.render();
            if s.contains(" + ") || s.contains(" - ") {
                s = format!("({s})");
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => s.push_str(&format!(" * x{}", i + 1)),
                    _ => s.push_str(&format!(" * x{}^{}", i + 1, k)),
                }
            }
            parts.push(s);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Flattened polynomial for fast evaluation.
#[derive(Clone, Debug, Default)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (c, f) in &self.terms {
            let mut t = *c;
            for &(i, k) in f {
                t *= if k == 1 { x[i] } else { x[i].powi(k) };
            }
            s += t;
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Σ |c| (1 + |x|)^deg bound helper: returns (Σ|c|, max degree).
    pub fn size(&self) -> (f64, i32) {
        let s = self.terms.iter().map(|(c, _)| c.abs()).sum();
        let d = self.terms.iter().map(|(_, f)| f.iter().map(|(_, k)| k).sum::<i32>()).max().unwrap_or(0);
        (s, d)
    }
}

/// P(α,β)(x) = 2 x_α x_β on R^{b,2}, indices 1-based.
pub fn p_alpha_beta<C: Coeff>(alpha: usize, beta: usize, b: usize) -> Result<MultiPoly<C>> {
    for i in [alpha, beta] {
        if i == 0 || i > b {
            return Err(Error::Index { index: i, max: b });
        }
    }
    let n = b + 2;
    let mut e = vec![0; n];
    e[alpha - 1] += 1;
    e[beta - 1] += 1;
    Ok(MultiPoly::from_terms(n, [(e, C::from_i64(2))]))
}

pub fn laplacian<C: Coeff>(p: &MultiPoly<C>) -> MultiPoly<C> {
    p.laplacian()
}

/// exp(−Δ/8πy)(P) = Σ_m ν^m c_m with ν = 1/(4πy) and c_m = (−½)^m Δ^m P / m!.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatExpansion<C: Coeff> {
    pub coeffs: Vec<MultiPoly<C>>,
}

impl<C: Coeff> HeatExpansion<C> {
    pub fn at_y(&self, y: f64) -> MultiPoly<f64> {
        let nu = 1.0 / (4.0 * std::f64::consts::PI * y);
        let n = self.coeffs[0].nvars();
        let mut out = MultiPoly::zero(n);
        let mut pw = 1.0;
        for c in &self.coeffs {
            out = out.add(&c.to_f64().scale(&pw));
            pw *= nu;
        }
        out
    }

    pub fn compile(&self) -> Vec<CompiledPoly> {
        self.coeffs.iter().map(|c| c.compile()).collect()
    }
}

/// Heat expansion using the Euclidean Laplacian of all variables.
pub fn heat_operator<C: Coeff>(p: &MultiPoly<C>) -> HeatExpansion<C> {
    let mut coeffs = vec![p.clone()];
    let mut cur = p.clone();
    let mut m = 1i64;
    loop {
        cur = cur.laplacian();
        if cur.is_zero() {
            break;
        }
        // (−½)^m / m! accumulated one step at a time
        let c = cur.scale(&C::from_ratio(-1, 2 * m));
        cur = c.clone();
        coeffs.push(c);
        m += 1;
    }
    HeatExpansion { coeffs }
}

/// exp(−Δ/8πy)(P) evaluated with a numeric y.
pub fn heat_operator_at<C: Coeff>(p: &MultiPoly<C>, y: f64) -> MultiPoly<f64> {
    heat_operator(p).at_y(y)
}

/// Frame quantities derived from g alone: z = g⁻¹(z0).
#[derive(Clone, Debug)]
pub struct ExactFrame<C: Coeff> {
    pub b: usize,
    pub g: Vec<Vec<C>>,
    pub u_z: Vec<C>,
    pub u_zperp: Vec<C>,
    pub u_zperp_norm2: C,
    pub u_z_norm2: C,
    /// g(u).
    pub gu: Vec<C>,
    /// Matrix of the w-map v ↦ g(v_{w⊥} + v_w).
    pub w: Vec<Vec<C>>,
}

fn jdot<C: Coeff>(a: &[C], b: &[C]) -> C {
    let n = a.len();
    let mut s = C::zero();
    for i in 0..n {
        let t = a[i].mul(&b[i]);
        s = if i + 2 < n { s.add(&t) } else { s.sub(&t) };
    }
    s
}

fn mat_vec<C: Coeff>(m: &[Vec<C>], v: &[C]) -> Vec<C> {
    m.iter().map(|row| row.iter().zip(v).fold(C::zero(), |s, (a, b)| s.add(&a.mul(b)))).collect()
}

impl<C: Coeff> ExactFrame<C> {
    pub fn from_isometry(g: &[Vec<C>]) -> Result<Self> {
        let n = g.len();
        if n < 5 || g.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("isometry must be square of size ≥ 5".into()));
        }
        let b = n - 2;
        // g⁻¹ e_{b+j} = J gᵀ J e_{b+j}: the negated row b+j of g, J-signed
        let inv_col = |k: usize| -> Vec<C> {
            (0..n).map(|i| {
                let v = g[k][i].neg();
                if i + 2 < n { v } else { v.neg() }
            })
            .collect()
        };
        let f = [inv_col(n - 2), inv_col(n - 1)];
        let half_sqrt2 = C::sqrt2().div(&C::from_i64(2));
        let mut u = vec![C::zero(); n];
        u[b - 1] = half_sqrt2.clone();
        u[b + 1] = half_sqrt2;
        // f_j² = −1, so u_z = −Σ (u, f_j) f_j
        let mut u_z = vec![C::zero(); n];
        for fj in &f {
            let c = jdot(&u, fj);
            for i in 0..n {
                u_z[i] = u_z[i].sub(&c.mul(&fj[i]));
            }
        }
        let u_zperp: Vec<C> = u.iter().zip(&u_z).map(|(a, c)| a.sub(c)).collect();
        let uzp2 = jdot(&u_zperp, &u_zperp);
        let uz2 = jdot(&u_z, &u_z);
        if uzp2.is_zero() || uz2.is_zero() {
            return Err(Error::Degenerate("u has a degenerate projection to z".into()));
        }
        // projection I − P_{u_{z⊥}} − P_{u_z}
        let mut proj = vec![vec![C::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut v = if i == j { C::one() } else { C::zero() };
                for (a, a2) in [(&u_zperp, &uzp2), (&u_z, &uz2)] {
                    let t = a[i].mul(&a[j]).div(a2);
                    v = if j + 2 < n { v.sub(&t) } else { v.add(&t) };
                }
                proj[i][j] = v;
            }
        }
        let w: Vec<Vec<C>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(C::zero(), |s, k| s.add(&g[i][k].mul(&proj[k][j])))).collect())
            .collect();
        let gu = mat_vec(g, &u);
        Ok(ExactFrame { b, g: g.to_vec(), u_z, u_zperp, u_zperp_norm2: uzp2, u_z_norm2: uz2, gu, w })
    }

    /// The linear form v ↦ (v, u_{z⊥}) as a polynomial.
    pub fn pairing_u_zperp(&self) -> MultiPoly<C> {
        let n = self.b + 2;
        let c: Vec<C> = (0..n).map(|i| if i + 2 < n { self.u_zperp[i].clone() } else { self.u_zperp[i].neg() }).collect();
        MultiPoly::linear(&c)
    }

    pub fn pairing_u_z(&self) -> MultiPoly<C> {
        let n = self.b + 2;
        let c: Vec<C> = (0..n).map(|i| if i + 2 < n { self.u_z[i].clone() } else { self.u_z[i].neg() }).collect();
        MultiPoly::linear(&c)
    }

    /// Euclidean projector onto W′ = g(w⊥ ⊕ w), the orthogonal complement of
    /// g(u_{z⊥}) ∈ z0⊥ and g(u_z) ∈ z0.
    pub fn image_projector(&self) -> Vec<Vec<C>> {
        let n = self.b + 2;
        let n1 = mat_vec(&self.g, &self.u_zperp);
        let n2 = mat_vec(&self.g, &self.u_z);
        let d1 = self.u_zperp_norm2.clone();
        let d2 = self.u_z_norm2.neg();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let id = if i == j { C::one() } else { C::zero() };
                        id.sub(&n1[i].mul(&n1[j]).div(&d1)).sub(&n2[i].mul(&n2[j]).div(&d2))
                    })
                    .collect()
            })
            .collect()
    }
}

/// Pieces p_{(α,β),w,h⁺,0} for h⁺ = 0, 1, 2, as polynomials in the
/// coordinates x of the image of the w-map.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDecomposition<C: Coeff> {
    pub alpha: usize,
    pub beta: usize,
    pub pieces: [MultiPoly<C>; 3],
}

/// Closed forms: p₂ = 2 s_α s_β, p₁ = 2 s_α x_β + 2 s_β x_α, p₀ = 2 x_α x_β,
/// with s_j = (g(u), e_j)/u_{z⊥}².
pub fn decompose_exact<C: Coeff>(alpha: usize, beta: usize, frame: &ExactFrame<C>) -> Result<PolyDecomposition<C>> {
    let b = frame.b;
    let p0 = p_alpha_beta::<C>(alpha, beta, b)?;
    let n = b + 2;
    let s = |j: usize| frame.gu[j - 1].div(&frame.u_zperp_norm2);
    let (sa, sb) = (s(alpha), s(beta));
    let two = C::from_i64(2);
    let p2 = MultiPoly::constant(n, two.mul(&sa).mul(&sb));
    let xa = MultiPoly::<C>::var(n, alpha - 1);
    let xb = MultiPoly::<C>::var(n, beta - 1);
    let p1 = xb.scale(&two.mul(&sa)).add(&xa.scale(&two.mul(&sb)));
    Ok(PolyDecomposition { alpha, beta, pieces: [p0, p1, p2] })
}

/// Floating-point decomposition for an isometry g mapping the frame's z to z0.
pub fn decompose(alpha: usize, beta: usize, g: &Isometry, frame: &PointFrame) -> Result<PolyDecomposition<f64>> {
    frame.w_matrix(g)?;
    let ef = ExactFrame::from_isometry(&g.to_rows())?;
    decompose_exact(alpha, beta, &ef)
}

/// General decomposition of any P: p_{h⁺,h⁻} = (G₁·∇)^{h⁺}(G₂·∇)^{h⁻} P
/// / (h⁺! h⁻! (u_{z⊥}²)^{h⁺} (u_z²)^{h⁻}) with G₁ = g(u_{z⊥}), G₂ = g(u_z).
pub fn decompose_general<C: Coeff>(p: &MultiPoly<C>, frame: &ExactFrame<C>) -> BTreeMap<(u32, u32), MultiPoly<C>> {
    let g1 = mat_vec(&frame.g, &frame.u_zperp);
    let g2 = mat_vec(&frame.g, &frame.u_z);
    let deg = p.degree().unwrap_or(0);
    let mut out = BTreeMap::new();
    let mut d1 = p.clone();
    let mut f1 = C::one();
    for hp in 0..=deg {
        if hp > 0 {
            d1 = d1.directional(&g1);
            f1 = f1.mul(&C::from_i64(hp as i64)).mul(&frame.u_zperp_norm2);
        }
        if d1.is_zero() {
            break;
        }
        let mut d2 = d1.clone();
        let mut f2 = C::one();
        for hm in 0..=deg - hp {
            if hm > 0 {
                d2 = d2.directional(&g2);
                f2 = f2.mul(&C::from_i64(hm as i64)).mul(&frame.u_z_norm2);
            }
            if d2.is_zero() {
                break;
            }
            out.insert((hp, hm), d2.scale(&C::one().div(&f1.mul(&f2))));
        }
    }
    out
}

/// P∘g − Σ_{h⁺,h⁻} (v, u_{z⊥})^{h⁺} (v, u_z)^{h⁻} (p_{h⁺,h⁻}∘w)(v), which is
/// zero for a correct decomposition.
pub fn reconstruction_defect<C: Coeff>(
    p: &MultiPoly<C>,
    frame: &ExactFrame<C>,
    pieces: &BTreeMap<(u32, u32), MultiPoly<C>>,
) -> MultiPoly<C> {
    let lhs = p.substitute_linear(&frame.g);
    let lp = frame.pairing_u_zperp();
    let lm = frame.pairing_u_z();
    let mut rhs = MultiPoly::zero(p.nvars());
    for (&(hp, hm), piece) in pieces {
        rhs = rhs.add(&piece.substitute_linear(&frame.w).mul(&lp.pow(hp)).mul(&lm.pow(hm)));
    }
    lhs.sub(&rhs)
}

impl<C: Coeff> PolyDecomposition<C> {
    pub fn as_map(&self) -> BTreeMap<(u32, u32), MultiPoly<C>> {
        (0..3u32).map(|h| ((h, 0), self.pieces[h as usize].clone())).filter(|(_, p)| !p.is_zero()).collect()
    }

    /// The pieces composed with the w-map, as polynomials in v.
    pub fn composed(&self, frame: &ExactFrame<C>) -> [MultiPoly<C>; 3] {
        [
            self.pieces[0].substitute_linear(&frame.w),
            self.pieces[1].substitute_linear(&frame.w),
            self.pieces[2].substitute_linear(&frame.w),
        ]
    }

    /// Heat expansions of the pieces for the theta function of K, using the
    /// Laplacian of W′ = g(w⊥ ⊕ w).
    pub fn heat_on_image(&self, frame: &ExactFrame<C>) -> [HeatExpansion<C>; 3] {
        let pi = frame.image_projector();
        let h = |p: &MultiPoly<C>| heat_operator(&p.substitute_linear(&pi));
        [h(&self.pieces[0]), h(&self.pieces[1]), h(&self.pieces[2])]
    }
}

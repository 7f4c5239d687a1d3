//! Even unimodular lattices of signature (b,2), their real models, and
//! vector enumeration under a positive-definite majorant.

pub mod enumerate;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use enumerate::Ellipsoid;

/// Integral lattice given by its Gram matrix on a fixed basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LatticeDoc", into = "LatticeDoc")]
pub struct Lattice {
    gram: Vec<Vec<i64>>,
    signature: (usize, usize),
    unimodular: bool,
}

/// On-disk form: {"gram": [[...]], "unimodular": true}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub gram: Vec<Vec<i64>>,
    #[serde(default)]
    pub unimodular: bool,
}

impl TryFrom<LatticeDoc> for Lattice {
    type Error = Error;
    fn try_from(doc: LatticeDoc) -> Result<Self> {
        Lattice::new(doc.gram, doc.unimodular)
    }
}

impl From<Lattice> for LatticeDoc {
    fn from(l: Lattice) -> Self {
        LatticeDoc { gram: l.gram, unimodular: l.unimodular }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector {
    pub coords: Vec<i64>,
}

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticeVector { coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn scaled(&self, t: i64) -> Self {
        LatticeVector { coords: self.coords.iter().map(|c| c * t).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1)
    }

    /// λ/t, if it is still a lattice vector.
    pub fn divide(&self, t: i64) -> Option<Self> {
        if t == 0 || self.coords.iter().any(|c| c % t != 0) {
            return None;
        }
        Some(LatticeVector { coords: self.coords.iter().map(|c| c / t).collect() })
    }

    pub fn content(&self) -> u64 {
        self.coords.iter().fold(0i64, |g, &c| g.gcd(&c)).unsigned_abs()
    }
}

impl Lattice {
    /// Validates symmetry, evenness and (when flagged) |det| = 1; the
    /// signature is computed, not supplied.
    pub fn new(gram: Vec<Vec<i64>>, unimodular: bool) -> Result<Self> {
        let n = gram.len();
        if n == 0 {
            return Err(Error::InvalidLattice("empty Gram matrix".into()));
        }
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            for j in 0..n {
                if row[j] != gram[j][i] {
                    return Err(Error::InvalidLattice(format!("Gram not symmetric at ({i},{j})")));
                }
            }
            if row[i] % 2 != 0 {
                return Err(Error::InvalidLattice(format!("odd diagonal entry at {i}")));
            }
        }
        let det = determinant(&gram);
        if det.is_zero() {
            return Err(Error::InvalidLattice("degenerate Gram matrix".into()));
        }
        if unimodular && det.abs() != BigInt::from(1) {
            return Err(Error::InvalidLattice(format!("flagged unimodular but det = {det}")));
        }
        let signature = inertia(&gram)?;
        Ok(Lattice { gram, signature, unimodular })
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn is_unimodular(&self) -> bool {
        self.unimodular
    }

    pub fn det(&self) -> BigInt {
        determinant(&self.gram)
    }

    pub fn gram_f64(&self) -> DMatrix<f64> {
        let n = self.rank();
        DMatrix::from_fn(n, n, |i, j| self.gram[i][j] as f64)
    }

    fn check(&self, v: &LatticeVector) -> Result<()> {
        if v.coords.len() != self.rank() {
            return Err(Error::Dimension { expected: self.rank(), got: v.coords.len() });
        }
        Ok(())
    }

    /// The bilinear form (v, w).
    pub fn inner(&self, v: &LatticeVector, w: &LatticeVector) -> Result<i64> {
        self.check(v)?;
        self.check(w)?;
        let mut s = 0i64;
        for (i, row) in self.gram.iter().enumerate() {
            if v.coords[i] == 0 {
                continue;
            }
            let rw: i64 = row.iter().zip(&w.coords).map(|(g, x)| g * x).sum();
            s += v.coords[i] * rw;
        }
        Ok(s)
    }

    /// q(v) = (v, v)/2.
    pub fn quadratic_form(&self, v: &LatticeVector) -> Result<Rational64> {
        Ok(Rational64::new(self.inner(v, v)?, 2))
    }
}

/// Fraction-free (Bareiss) determinant.
pub fn determinant(gram: &[Vec<i64>]) -> BigInt {
    let n = gram.len();
    let mut a: Vec<Vec<BigInt>> = gram.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::from(1);
    }
    a[n - 1][n - 1].clone() * sign
}

/// Counts of positive and negative eigenvalues of a nondegenerate Gram.
pub fn inertia(gram: &[Vec<i64>]) -> Result<(usize, usize)> {
    let n = gram.len();
    let m = DMatrix::from_fn(n, n, |i, j| gram[i][j] as f64);
    let eig = m.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut pos = 0;
    let mut neg = 0;
    for &e in eig.eigenvalues.iter() {
        if e.abs() <= 1e-9 * scale {
            return Err(Error::InvalidLattice("singular Gram matrix".into()));
        }
        if e > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Ok((pos, neg))
}

/// Root-lattice Gram of E8; Bourbaki labelling, edges 1-3, 3-4, 4-5, 5-6,
/// 6-7, 7-8, 2-4.
pub fn e8_lattice() -> Lattice {
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    for &(a, b) in &[(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)] {
        g[a - 1][b - 1] = -1;
        g[b - 1][a - 1] = -1;
    }
    Lattice::new(g, true).expect("E8 Gram is valid")
}

pub fn hyperbolic_plane() -> Lattice {
    Lattice::new(vec![vec![0, 1], vec![1, 0]], true).expect("U is valid")
}

pub fn direct_sum(a: &Lattice, b: &Lattice) -> Lattice {
    let (n, m) = (a.rank(), b.rank());
    let mut g = vec![vec![0i64; n + m]; n + m];
    for i in 0..n {
        g[i][..n].copy_from_slice(&a.gram[i]);
    }
    for i in 0..m {
        g[n + i][n..].copy_from_slice(&b.gram[i]);
    }
    Lattice {
        gram: g,
        signature: (a.signature.0 + b.signature.0, a.signature.1 + b.signature.1),
        unimodular: a.unimodular && b.unimodular,
    }
}

/// L = E8^{(b−2)/8} ⊕ U ⊕ U with the sublattice K = E8^{(b−2)/8} ⊕ U.
///
/// Basis order of L: the E8 blocks, then (u₂, u₂′), then (u, u′). K is the
/// span of the first b basis vectors, so a K-vector embeds by zero padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitLattice {
    pub b: usize,
    pub l: Lattice,
    pub k: Lattice,
}

impl SplitLattice {
    pub fn e8_blocks(&self) -> usize {
        (self.b - 2) / 8
    }

    /// Positions of (u₂, u₂′) in both L and K coordinates.
    pub fn u2_index(&self) -> [usize; 2] {
        [self.b - 2, self.b - 1]
    }

    /// Positions of the split-off (u, u′) in L coordinates.
    pub fn u_index(&self) -> [usize; 2] {
        [self.b, self.b + 1]
    }

    pub fn embed_k(&self, v: &LatticeVector) -> LatticeVector {
        let mut c = v.coords.clone();
        c.resize(self.b + 2, 0);
        LatticeVector::new(c)
    }

    /// Coordinates (n, 1) on (u₂, u₂′): a vector of K with q = n.
    pub fn represent_integer(&self, n: i64) -> Result<LatticeVector> {
        if n <= 0 {
            return Err(Error::NotPositive(n));
        }
        let mut c = vec![0i64; self.b];
        let [i, j] = self.u2_index();
        c[i] = n;
        c[j] = 1;
        Ok(LatticeVector::new(c))
    }
}

pub fn signature_b2_lattice(b: usize) -> Result<SplitLattice> {
    if b <= 2 || b % 8 != 2 {
        return Err(Error::Signature { b });
    }
    let u = hyperbolic_plane();
    let mut k = u.clone();
    for _ in 0..(b - 2) / 8 {
        k = direct_sum(&e8_lattice(), &k);
    }
    let l = direct_sum(&k, &u);
    Ok(SplitLattice { b, l, k })
}

/// Divisors of the gcd of the coordinates, ascending.
pub fn vector_divisors(v: &LatticeVector) -> Result<Vec<u64>> {
    let g = v.content();
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= g {
        if g % d == 0 {
            small.push(d);
            if d * d != g {
                large.push(g / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Ok(small)
}

/// Exact LDLᵀ of a positive-definite integer matrix: (unit lower L, D).
pub fn rational_ldl(gram: &[Vec<i64>]) -> Result<(Vec<Vec<BigRational>>, Vec<BigRational>)> {
    let n = gram.len();
    let r = |x: i64| BigRational::from_integer(BigInt::from(x));
    let mut l = vec![vec![BigRational::zero(); n]; n];
    let mut d = vec![BigRational::zero(); n];
    for j in 0..n {
        let mut dj = r(gram[j][j]);
        for k in 0..j {
            dj -= &l[j][k] * &l[j][k] * &d[k];
        }
        if !dj.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        l[j][j] = r(1);
        for i in j + 1..n {
            let mut v = r(gram[i][j]);
            for k in 0..j {
                v -= &l[i][k] * &l[j][k] * &d[k];
            }
            l[i][j] = v / &dj;
        }
        d[j] = dj;
    }
    Ok((l, d))
}

/// The map g0 from lattice coordinates to the standard basis (e_j) of
/// R^{b,2}, e_j² = +1 for j ≤ b and −1 for j > b.
#[derive(Clone, Debug)]
pub struct RealBasisMap {
    pub matrix: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub tolerance: f64,
}

pub const BASIS_MAP_TOLERANCE: f64 = 1e-12;

impl RealBasisMap {
    pub fn new(split: &SplitLattice) -> Result<Self> {
        let b = split.b;
        let n = b + 2;
        let mut m = DMatrix::zeros(n, n);
        let e8 = e8_lattice();
        let (l, d) = rational_ldl(e8.gram())?;
        let sqrt_d: Vec<f64> = d.iter().map(|x| x.to_f64().expect("finite").sqrt()).collect();
        for blk in 0..split.e8_blocks() {
            let o = 8 * blk;
            for i in 0..8 {
                for j in 0..=i {
                    m[(o + j, o + i)] = l[i][j].to_f64().expect("finite") * sqrt_d[j];
                }
            }
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // u₂ ↦ (e_{b-1} + e_{b+1})/√2, u₂′ ↦ (e_{b-1} − e_{b+1})/√2 (0-based b-2, b)
        let [p, pp] = split.u2_index();
        m[(b - 2, p)] = s;
        m[(b, p)] = s;
        m[(b - 2, pp)] = s;
        m[(b, pp)] = -s;
        // u ↦ (e_b + e_{b+2})/√2, u′ ↦ (e_b − e_{b+2})/√2
        let [q, qq] = split.u_index();
        m[(b - 1, q)] = s;
        m[(b + 1, q)] = s;
        m[(b - 1, qq)] = s;
        m[(b + 1, qq)] = -s;
        let inverse = m.clone().try_inverse().ok_or_else(|| Error::InvalidLattice("g0 singular".into()))?;
        let map = RealBasisMap { matrix: m, inverse, tolerance: BASIS_MAP_TOLERANCE };
        let res = map.residual(&split.l);
        if res > map.tolerance {
            return Err(Error::InvalidLattice(format!("g0 residual {res:.3e}")));
        }
        Ok(map)
    }

    /// max |g0⁻ᵀ · gram · g0⁻¹ − diag(1,…,1,−1,−1)|.
    pub fn residual(&self, l: &Lattice) -> f64 {
        let n = l.rank();
        let conj = self.inverse.transpose() * l.gram_f64() * &self.inverse;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i != j {
                    0.0
                } else if i < n - 2 {
                    1.0
                } else {
                    -1.0
                };
                worst = worst.max((conj[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Image of a lattice vector (L coordinates) in the e-basis.
    pub fn apply(&self, v: &[i64]) -> Vec<f64> {
        let n = self.matrix.nrows();
        let mut out = vec![0.0; n];
        for (j, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(i, j)] * c as f64;
            }
        }
        out
    }

    /// The b × b block sending K coordinates to the e-basis (rows indexed by
    /// all b+2 e-coordinates).
    pub fn k_block(&self, b: usize) -> DMatrix<f64> {
        self.matrix.columns(0, b).into_owned()
    }
}

pub fn real_basis_map(split: &SplitLattice) -> Result<RealBasisMap> {
    RealBasisMap::new(split)
}

/// Positive-definite form on a lattice, given by its Gram in lattice
/// coordinates.
#[derive(Clone, Debug)]
pub struct Majorant {
    pub gram: DMatrix<f64>,
}

impl Majorant {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if nalgebra::Cholesky::new(gram.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Majorant { gram })
    }

    pub fn norm(&self, v: &[i64]) -> f64 {
        let n = v.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += v[i] as f64 * self.gram[(i, j)] * v[j] as f64;
            }
        }
        s
    }
}

/// Every λ with (λ, λ)_w ≤ bound, sorted lexicographically.
pub fn enumerate_majorant(w: &Majorant, bound: f64) -> Result<Vec<LatticeVector>> {
    if bound < 0.0 {
        return Err(Error::Invalid("negative bound".into()));
    }
    let e = Ellipsoid::new(&w.gram, None)?;
    Ok(e.points(bound).into_iter().map(LatticeVector::new).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e8_is_even_unimodular_definite() {
        let e8 = e8_lattice();
        assert_eq!(e8.det(), BigInt::from(1));
        assert_eq!(e8.signature(), (8, 0));
        assert!(e8.gram().iter().enumerate().all(|(i, r)| r[i] == 2));
    }

    #[test]
    fn hyperbolic_plane_values() {
        let u = hyperbolic_plane();
        let q = |a, b| u.quadratic_form(&LatticeVector::new(vec![a, b])).unwrap();
        assert_eq!(q(1, 0), Rational64::from_integer(0));
        assert_eq!(q(3, 2), Rational64::from_integer(6));
        assert_eq!(q(-7, 1), Rational64::from_integer(-7));
        assert_eq!(u.inner(&LatticeVector::new(vec![1, 0]), &LatticeVector::new(vec![0, 1])).unwrap(), 1);
    }

    #[test]
    fn sums_and_signatures() {
        let u = hyperbolic_plane();
        assert_eq!(direct_sum(&u, &u).signature(), (2, 2));
        let eu = direct_sum(&e8_lattice(), &u);
        assert_eq!(eu.rank(), 10);
        assert_eq!(eu.det().abs(), BigInt::from(1));
        assert_eq!(direct_sum(&e8_lattice(), &e8_lattice()).signature(), (16, 0));
    }

    #[test]
    fn split_lattices() {
        let s = signature_b2_lattice(10).unwrap();
        assert_eq!(s.l.rank(), 12);
        assert_eq!(s.l.signature(), (10, 2));
        assert_eq!(s.k.rank(), 10);
        assert_eq!(s.k.signature(), (9, 1));
        assert_eq!(inertia(s.l.gram()).unwrap(), (10, 2));
        assert_eq!(signature_b2_lattice(18).unwrap().l.rank(), 20);
        for b in [0, 1, 2, 9, 11, 16] {
            assert_eq!(signature_b2_lattice(b).unwrap_err(), Error::Signature { b });
        }
    }

    #[test]
    fn divisors() {
        let d = |c: Vec<i64>| vector_divisors(&LatticeVector::new(c)).unwrap();
        assert_eq!(d(vec![2, 4, 6]), vec![1, 2]);
        assert_eq!(d(vec![6, 12]), vec![1, 2, 3, 6]);
        assert_eq!(d(vec![3, -5]), vec![1]);
        assert_eq!(d(vec![0, -36]), vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
        assert_eq!(vector_divisors(&LatticeVector::new(vec![0, 0])), Err(Error::ZeroVector));
    }

    #[test]
    fn basis_map_hyperbolic_columns_exact() {
        let s = signature_b2_lattice(10).unwrap();
        let g0 = real_basis_map(&s).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = vec![0i64; 12];
        u[10] = 1;
        let img = g0.apply(&u);
        let mut expect = vec![0.0; 12];
        expect[9] = h;
        expect[11] = h;
        assert_eq!(img, expect);
        assert!(g0.residual(&s.l) < 1e-12);
    }

    #[test]
    fn k_lands_in_its_coordinate_span() {
        let s = signature_b2_lattice(18).unwrap();
        let g0 = real_basis_map(&s).unwrap();
        // rows b (0-based b-1) and b+2 (0-based b+1) vanish on K
        for j in 0..s.b {
            assert_eq!(g0.matrix[(s.b - 1, j)], 0.0);
            assert_eq!(g0.matrix[(s.b + 1, j)], 0.0);
        }
    }

    #[test]
    fn represent_integer_has_norm() {
        let s = signature_b2_lattice(10).unwrap();
        for n in 1..=100 {
            let v = s.represent_integer(n).unwrap();
            assert_eq!(s.k.quadratic_form(&v).unwrap(), Rational64::from_integer(n));
        }
        assert_eq!(s.represent_integer(0), Err(Error::NotPositive(0)));
    }

    #[test]
    fn lattice_json_roundtrip_validates() {
        let doc = LatticeDoc { gram: vec![vec![1, 0], vec![0, 2]], unimodular: false };
        assert!(Lattice::try_from(doc).is_err());
    }
}

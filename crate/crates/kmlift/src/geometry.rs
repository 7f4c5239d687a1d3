//! Models of the symmetric space of L ⊗ R: Grassmannian frames, the tube
//! domain, the KAN identification and translation matrices.
//!
//! Vectors of L ⊗ R are stored in the standard basis (e_j) of R^{b,2}
//! (0-based: e_{j+1} is index j). Since g0 is the identity there, an isometry
//! of L ⊗ R is stored as the matrix of g0∘g∘g0⁻¹. Tube points use the K-part
//! of the KAN basis (u, u₂, d_3, …, d_b, u₂′, u′), i.e. the coordinates of
//! (u₂, d_3, …, d_b, u₂′).

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Coeff;

/// Tolerance for subspace comparisons.
pub const GEOMETRY_TOLERANCE: f64 = 1e-9;

/// Bilinear form of R^{b,2} in the e-basis.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n - 2 {
        s += a[i] * b[i];
    }
    s - a[n - 2] * b[n - 2] - a[n - 1] * b[n - 1]
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

/// diag(1, …, 1, −1, −1).
pub fn metric(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i != j { 0.0 } else if i + 2 < n { 1.0 } else { -1.0 })
}

fn axpy(out: &mut [f64], s: f64, v: &[f64]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += s * x;
    }
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// The isotropic vectors u, u′ of the split-off plane, in e-coordinates.
pub fn u_vec(b: usize) -> Vec<f64> {
    let mut v = vec![0.0; b + 2];
    v[b - 1] = FRAC_1_SQRT_2;
    v[b + 1] = FRAC_1_SQRT_2;
    v
}

pub fn u_prime_vec(b: usize) -> Vec<f64> {
    let mut v = vec![0.0; b + 2];
    v[b - 1] = FRAC_1_SQRT_2;
    v[b + 1] = -FRAC_1_SQRT_2;
    v
}

/// A real isometry of R^{b,2}, in e-coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub matrix: DMatrix<f64>,
    pub tolerance: f64,
}

impl Isometry {
    pub fn new(matrix: DMatrix<f64>, tolerance: f64) -> Result<Self> {
        let g = Isometry { matrix, tolerance };
        let d = g.defect();
        if !(d <= tolerance) {
            return Err(Error::NotIsometry(d));
        }
        Ok(g)
    }

    pub fn identity(n: usize) -> Self {
        Isometry { matrix: DMatrix::identity(n, n), tolerance: GEOMETRY_TOLERANCE }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// max |gᵀ J g − J|.
    pub fn defect(&self) -> f64 {
        let n = self.dim();
        let j = metric(n);
        let r = self.matrix.transpose() * &j * &self.matrix - j;
        r.amax()
    }

    /// g⁻¹ = J gᵀ J.
    pub fn inverse(&self) -> Self {
        let j = metric(self.dim());
        Isometry { matrix: &j * self.matrix.transpose() * &j, tolerance: self.tolerance }
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Isometry) -> Self {
        Isometry { matrix: &self.matrix * &other.matrix, tolerance: self.tolerance.max(other.tolerance) }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (j, &x) in v.iter().enumerate() {
            if x != 0.0 {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += self.matrix[(i, j)] * x;
                }
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.matrix.row(i).iter().copied().collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<f64>], tolerance: f64) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("isometry rows must form a square matrix".into()));
        }
        Isometry::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]), tolerance)
    }

    /// Distance between g(z) and z0 for a plane z spanned by `basis`.
    pub fn plane_defect(&self, basis: [&[f64]; 2]) -> f64 {
        let n = self.dim();
        let img = [self.apply(basis[0]), self.apply(basis[1])];
        plane_distance([&img[0], &img[1]], [&unit(n, n - 2), &unit(n, n - 1)])
    }

    /// Whether g fixes z0 = span(e_{b+1}, e_{b+2}).
    pub fn fixes_base_plane(&self) -> f64 {
        let n = self.dim();
        self.plane_defect([&unit(n, n - 2), &unit(n, n - 1)])
    }
}

/// Row-major serialization used by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsometryDoc {
    pub rows: Vec<Vec<f64>>,
}

/// Orthogonal projector onto a nondegenerate plane, P = F (FᵀJF)⁻¹ FᵀJ.
pub fn plane_projector(basis: [&[f64]; 2]) -> DMatrix<f64> {
    let n = basis[0].len();
    let g = Matrix2::new(
        dot(basis[0], basis[0]),
        dot(basis[0], basis[1]),
        dot(basis[1], basis[0]),
        dot(basis[1], basis[1]),
    );
    let gi = g.try_inverse().unwrap_or_else(Matrix2::zeros);
    let mut p = DMatrix::zeros(n, n);
    // P v = Σ_{a,b} f_a (G⁻¹)_{ab} (f_b, v)
    for a in 0..2 {
        for c in 0..2 {
            let coef = gi[(a, c)];
            for i in 0..n {
                for j in 0..n {
                    let sj = if j + 2 < n { 1.0 } else { -1.0 };
                    p[(i, j)] += basis[a][i] * coef * basis[c][j] * sj;
                }
            }
        }
    }
    p
}

/// Frobenius distance of the projectors onto two planes.
pub fn plane_distance(a: [&[f64]; 2], b: [&[f64]; 2]) -> f64 {
    (plane_projector(a) - plane_projector(b)).norm()
}

/// Z = X + iY in the tube domain, in KAN K-coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubePoint {
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    #[serde(rename = "Y")]
    pub y: Vec<f64>,
}

/// q(v) = v_2 v_{b+1} + ½ Σ v_j² on K-coordinates (u₂, d…, u₂′).
pub fn q_k(v: &[f64]) -> f64 {
    let b = v.len();
    v[0] * v[b - 1] + 0.5 * v[1..b - 1].iter().map(|x| x * x).sum::<f64>()
}

/// The bilinear form on K-coordinates.
pub fn dot_k(v: &[f64], w: &[f64]) -> f64 {
    let b = v.len();
    v[0] * w[b - 1] + v[b - 1] * w[0] + v[1..b - 1].iter().zip(&w[1..b - 1]).map(|(a, c)| a * c).sum::<f64>()
}

impl TubePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let z = TubePoint { x, y };
        z.validate()?;
        Ok(z)
    }

    /// Z0 = i√2 e_{b+1}, i.e. Y = u₂ − u₂′.
    pub fn base(b: usize) -> Self {
        let mut y = vec![0.0; b];
        y[0] = 1.0;
        y[b - 1] = -1.0;
        TubePoint { x: vec![0.0; b], y }
    }

    pub fn b(&self) -> usize {
        self.x.len()
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.x.len();
        if b < 3 || self.y.len() != b {
            return Err(Error::TubePoint(format!("need X, Y of equal length ≥ 3, got {} and {}", b, self.y.len())));
        }
        if self.x.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(Error::TubePoint("non-finite coordinate".into()));
        }
        if !(q_k(&self.y) < 0.0) {
            return Err(Error::TubePoint("Y² must be negative".into()));
        }
        if !(self.y[b - 1] < 0.0) {
            return Err(Error::TubePoint("Y lies in the other connected component".into()));
        }
        Ok(())
    }

    pub fn translated(&self, xp: &[f64]) -> Self {
        TubePoint { x: self.x.iter().zip(xp).map(|(a, c)| a + c).collect(), y: self.y.clone() }
    }

    /// Y² = 2q(Y).
    pub fn y_norm2(&self) -> f64 {
        2.0 * q_k(&self.y)
    }
}

/// The KAN basis and the change of coordinates to the e-basis.
#[derive(Clone, Debug)]
pub struct KanBasis {
    pub b: usize,
    /// Columns are the KAN basis vectors in e-coordinates.
    pub t: DMatrix<f64>,
    pub t_inv: DMatrix<f64>,
}

impl KanBasis {
    pub fn new(b: usize) -> Self {
        let n = b + 2;
        let mut t = DMatrix::zeros(n, n);
        let s = FRAC_1_SQRT_2;
        t[(b - 1, 0)] = s;
        t[(b + 1, 0)] = s;
        t[(b - 2, 1)] = s;
        t[(b, 1)] = s;
        for i in 2..b {
            t[(i - 2, i)] = 1.0;
        }
        t[(b - 2, b)] = s;
        t[(b, b)] = -s;
        t[(b - 1, b + 1)] = s;
        t[(b + 1, b + 1)] = -s;
        // T⁻¹ = G Tᵀ J with G the KAN Gram, itself an involution
        let g = kan_gram(b);
        let t_inv = &g * t.transpose() * metric(n);
        KanBasis { b, t, t_inv }
    }

    /// e-coordinates of a K-vector given in KAN K-coordinates.
    pub fn k_to_e(&self, v: &[f64]) -> Vec<f64> {
        let n = self.b + 2;
        let mut out = vec![0.0; n];
        for (j, &x) in v.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.t[(i, j + 1)] * x;
            }
        }
        out
    }

    /// KAN coordinates of an e-vector.
    pub fn e_to_kan(&self, v: &[f64]) -> Vec<f64> {
        let n = self.b + 2;
        (0..n).map(|i| (0..n).map(|j| self.t_inv[(i, j)] * v[j]).sum()).collect()
    }

    /// KAN K-coordinates of an e-vector lying in K ⊗ R.
    pub fn e_to_k(&self, v: &[f64]) -> Vec<f64> {
        let full = self.e_to_kan(v);
        full[1..=self.b].to_vec()
    }

    pub fn to_e(&self, kan: &DMatrix<f64>) -> Isometry {
        Isometry { matrix: &self.t * kan * &self.t_inv, tolerance: GEOMETRY_TOLERANCE }
    }

    pub fn from_e(&self, g: &Isometry) -> DMatrix<f64> {
        &self.t_inv * &g.matrix * &self.t
    }
}

/// Gram of the KAN basis: (u, u′) = (u₂, u₂′) = 1, identity on the d_j.
pub fn kan_gram(b: usize) -> DMatrix<f64> {
    let n = b + 2;
    let mut g = DMatrix::zeros(n, n);
    g[(0, n - 1)] = 1.0;
    g[(n - 1, 0)] = 1.0;
    g[(1, n - 2)] = 1.0;
    g[(n - 2, 1)] = 1.0;
    for i in 2..b {
        g[(i, i)] = 1.0;
    }
    g
}

/// Data attached to a point z of the Grassmannian.
#[derive(Clone, Debug)]
pub struct PointFrame {
    pub b: usize,
    /// Orthogonal basis of z with equal negative norms.
    pub z_basis: [Vec<f64>; 2],
    pub u_z: Vec<f64>,
    pub u_zperp: Vec<f64>,
    /// Spans w, the complement of u_z in z.
    pub w_dir: Vec<f64>,
    pub mu: Vec<f64>,
    /// Projection of μ to K ⊗ R.
    pub mu_k: Vec<f64>,
    pub tube: Option<TubePoint>,
}

impl PointFrame {
    fn finish(b: usize, z_basis: [Vec<f64>; 2], w_dir: Vec<f64>, tube: Option<TubePoint>) -> Result<Self> {
        let u = u_vec(b);
        let (u_z, u_zperp) = project_onto([&z_basis[0], &z_basis[1]], &u);
        let uzp2 = norm2(&u_zperp);
        let uz2 = norm2(&u_z);
        if !(uzp2 > 0.0) || !(uz2 < 0.0) {
            return Err(Error::Degenerate("u has a degenerate projection to z".into()));
        }
        let mut mu = scaled(&u_prime_vec(b), -1.0);
        axpy(&mut mu, 0.5 / uzp2, &u_zperp);
        axpy(&mut mu, 0.5 / uz2, &u_z);
        // (μ, u) = 0, so the K-part is μ − (μ, u′) u
        let mut mu_k = mu.clone();
        axpy(&mut mu_k, -dot(&mu, &u_prime_vec(b)), &u);
        Ok(PointFrame { b, z_basis, u_z, u_zperp, w_dir, mu, mu_k, tube })
    }

    /// Frame of the plane z attached to Z by X_L = (X, 1, q(Y) − q(X)),
    /// Y_L = (Y, 0, −(X, Y)).
    pub fn from_tube(z: &TubePoint) -> Result<Self> {
        z.validate()?;
        let b = z.b();
        let kb = KanBasis::new(b);
        let u = u_vec(b);
        let up = u_prime_vec(b);
        let mut xl = kb.k_to_e(&z.x);
        axpy(&mut xl, 1.0, &up);
        axpy(&mut xl, q_k(&z.y) - q_k(&z.x), &u);
        let mut yl = kb.k_to_e(&z.y);
        axpy(&mut yl, -dot_k(&z.x, &z.y), &u);
        let w = yl.clone();
        PointFrame::finish(b, [xl, yl], w, Some(z.clone()))
    }

    /// Frame of z = g⁻¹(z0).
    pub fn from_isometry(g: &Isometry) -> Result<Self> {
        let n = g.dim();
        let gi = g.inverse();
        let f1 = gi.apply(&unit(n, n - 2));
        let f2 = gi.apply(&unit(n, n - 1));
        let u = u_vec(n - 2);
        let (u_z, _) = project_onto([&f1, &f2], &u);
        let mut w = scaled(&f1, dot(&u_z, &f2));
        axpy(&mut w, -dot(&u_z, &f1), &f2);
        PointFrame::finish(n - 2, [f1, f2], w, None)
    }

    pub fn project(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        project_onto([&self.z_basis[0], &self.z_basis[1]], v)
    }

    pub fn u_zperp_norm2(&self) -> f64 {
        norm2(&self.u_zperp)
    }

    pub fn u_z_norm2(&self) -> f64 {
        norm2(&self.u_z)
    }

    /// (λ, λ)_w = λ² − 2 (λ, w)²/w² for λ ∈ K ⊗ R (e-coordinates).
    pub fn majorant(&self, lam: &[f64]) -> f64 {
        let lw = dot(lam, &self.w_dir);
        norm2(lam) - 2.0 * lw * lw / norm2(&self.w_dir)
    }

    /// The component λ_w.
    pub fn w_component(&self, lam: &[f64]) -> Vec<f64> {
        scaled(&self.w_dir, dot(lam, &self.w_dir) / norm2(&self.w_dir))
    }

    /// Gram of the majorant on the columns of `basis` (e-coordinates).
    pub fn majorant_gram(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let n = basis.nrows();
        let k = basis.ncols();
        let jw: Vec<f64> = (0..n).map(|i| if i + 2 < n { self.w_dir[i] } else { -self.w_dir[i] }).collect();
        let w2 = norm2(&self.w_dir);
        let mut g = DMatrix::zeros(k, k);
        let cols: Vec<Vec<f64>> = (0..k).map(|j| basis.column(j).iter().copied().collect()).collect();
        let pw: Vec<f64> = cols.iter().map(|c| c.iter().zip(&jw).map(|(a, b)| a * b).sum()).collect();
        for i in 0..k {
            for j in 0..k {
                g[(i, j)] = dot(&cols[i], &cols[j]) - 2.0 * pw[i] * pw[j] / w2;
            }
        }
        g
    }

    /// (I − P_{u_{z⊥}} − P_{u_z}) as a matrix: the projection to w⊥ ⊕ w.
    pub fn w_projection(&self) -> DMatrix<f64> {
        let n = self.b + 2;
        let mut p = DMatrix::identity(n, n);
        for (a, a2) in [(&self.u_zperp, self.u_zperp_norm2()), (&self.u_z, self.u_z_norm2())] {
            for i in 0..n {
                for j in 0..n {
                    let sj = if j + 2 < n { 1.0 } else { -1.0 };
                    p[(i, j)] -= a[i] * a[j] * sj / a2;
                }
            }
        }
        p
    }

    /// Matrix of v ↦ g(v_{w⊥} + v_w); errors unless g maps z to z0.
    pub fn w_matrix(&self, g: &Isometry) -> Result<DMatrix<f64>> {
        let d = g.plane_defect([&self.z_basis[0], &self.z_basis[1]]);
        if !(d <= g.tolerance.max(GEOMETRY_TOLERANCE)) {
            return Err(Error::WrongPlane(d));
        }
        Ok(&g.matrix * self.w_projection())
    }
}

/// (v_z, v_{z⊥}) for an orthogonal basis of a negative plane.
fn project_onto(basis: [&[f64]; 2], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut vz = vec![0.0; v.len()];
    for f in basis {
        axpy(&mut vz, dot(v, f) / norm2(f), f);
    }
    let vzp = v.iter().zip(&vz).map(|(a, c)| a - c).collect();
    (vz, vzp)
}

pub fn project(frame: &PointFrame, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    frame.project(v)
}

pub fn tube_to_frame(z: &TubePoint) -> Result<PointFrame> {
    PointFrame::from_tube(z)
}

pub fn majorant(frame: &PointFrame, lam: &[f64]) -> f64 {
    frame.majorant(lam)
}

pub fn w_map(g: &Isometry, frame: &PointFrame, v: &[f64]) -> Result<Vec<f64>> {
    let m = frame.w_matrix(g)?;
    let n = v.len();
    Ok((0..n).map(|i| (0..n).map(|j| m[(i, j)] * v[j]).sum()).collect())
}

/// Element of N with parameters (φ, η, x, y) in the KAN basis.
pub fn n_matrix(phi: f64, eta: f64, x: &[f64], y: &[f64]) -> DMatrix<f64> {
    let m = x.len();
    let n = m + 4;
    let xy: f64 = x.iter().zip(y).map(|(a, c)| a * c).sum();
    let yy: f64 = y.iter().map(|a| a * a).sum();
    let xx: f64 = x.iter().map(|a| a * a).sum();
    let mut r = DMatrix::identity(n, n);
    let last = n - 1;
    let pen = n - 2;
    r[(0, 1)] = phi;
    for j in 0..m {
        r[(0, 2 + j)] = x[j] + 0.5 * phi * y[j];
        r[(1, 2 + j)] = y[j];
        r[(2 + j, pen)] = -y[j];
        r[(2 + j, last)] = -x[j] + 0.5 * phi * y[j];
    }
    r[(0, pen)] = eta - 0.5 * xy - phi * yy / 6.0;
    r[(0, last)] = -phi * eta - 0.5 * xx + phi * phi * yy / 24.0;
    r[(1, pen)] = -0.5 * yy;
    r[(1, last)] = -eta - 0.5 * xy + phi * yy / 6.0;
    r[(pen, last)] = -phi;
    r
}

pub fn a_matrix(m1: f64, m2: f64, b: usize) -> DMatrix<f64> {
    let n = b + 2;
    let mut d = vec![1.0; n];
    d[0] = m1;
    d[1] = m2;
    d[n - 2] = 1.0 / m2;
    d[n - 1] = 1.0 / m1;
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
}

/// Parameters and matrices (KAN basis) of a ∈ A, n ∈ N with a·n(z0) = z.
#[derive(Clone, Debug)]
pub struct KanFactors {
    pub m1: f64,
    pub m2: f64,
    pub phi: f64,
    pub eta: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub a: DMatrix<f64>,
    pub n: DMatrix<f64>,
}

/// Back-substitution for the Iwasawa factors of the point Z.
pub fn kan_factors(z: &TubePoint) -> Result<KanFactors> {
    z.validate()?;
    let b = z.b();
    let yb1 = z.y[b - 1];
    let m1 = (-q_k(&z.y)).sqrt();
    let m2 = -m1 / yb1;
    let y: Vec<f64> = z.y[1..b - 1].iter().map(|v| v / m1).collect();
    let phi = -z.x[b - 1] * m2 / m1;
    let x: Vec<f64> = z.x[1..b - 1].iter().zip(&y).map(|(xv, yv)| -xv / m1 + 0.5 * phi * yv).collect();
    let xy: f64 = x.iter().zip(&y).map(|(a, c)| a * c).sum();
    let yy: f64 = y.iter().map(|a| a * a).sum();
    let eta = -z.x[0] / (m1 * m2) - 0.5 * xy + phi * yy / 6.0;
    if ![m1, m2, phi, eta].iter().all(|v| v.is_finite()) || !(m1 > 0.0 && m2 > 0.0) {
        return Err(Error::Kan("non-finite or non-positive parameters".into()));
    }
    let a = a_matrix(m1, m2, b);
    let n = n_matrix(phi, eta, &x, &y);
    let f = KanFactors { m1, m2, phi, eta, x, y, a, n };
    // the remaining coordinate Y_2 is determined by the others; check the plane
    let kb = KanBasis::new(b);
    let an = kb.to_e(&(&f.a * &f.n));
    let frame = PointFrame::from_tube(z)?;
    let d = an.inverse().plane_defect([&frame.z_basis[0], &frame.z_basis[1]]);
    if !(d <= GEOMETRY_TOLERANCE * (1.0 + m1 + 1.0 / m1 + m2 + 1.0 / m2)) {
        return Err(Error::Kan(format!("plane mismatch {d:.3e}")));
    }
    Ok(f)
}

/// ψ(1, Z) = (a n)⁻¹ in e-coordinates.
pub fn psi(z: &TubePoint) -> Result<Isometry> {
    let f = kan_factors(z)?;
    let kb = KanBasis::new(z.b());
    Ok(kb.to_e(&(&f.a * &f.n)).inverse())
}

/// ψ(κ, Z) = κ · ψ(1, Z) for κ in the stabilizer of z0.
pub fn identify(kappa: &Isometry, z: &TubePoint) -> Result<Isometry> {
    let d = kappa.fixes_base_plane();
    if !(d <= kappa.tolerance.max(GEOMETRY_TOLERANCE)) {
        return Err(Error::NotInStabilizer(d));
    }
    Ok(kappa.compose(&psi(z)?))
}

/// M(X′) in the KAN basis, for any coefficient type.
pub fn translation_matrix_generic<C: Coeff>(xp: &[C]) -> Vec<Vec<C>> {
    let b = xp.len();
    let n = b + 2;
    let mut m = vec![vec![C::zero(); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C::one();
    }
    // KAN index j (1-based) holds X′_j = xp[j - 2]
    let xj = |j: usize| &xp[j - 2];
    m[0][1] = xj(b + 1).neg();
    for j in 3..=b {
        m[0][j - 1] = xj(j).neg();
    }
    m[0][b] = xj(2).neg();
    let mut q = xj(2).mul(xj(b + 1));
    let half = C::from_ratio(1, 2);
    for j in 3..=b {
        q = q.add(&half.mul(&xj(j).mul(xj(j))));
    }
    m[0][n - 1] = q.neg();
    for j in 2..=b + 1 {
        m[j - 1][n - 1] = xj(j).clone();
    }
    m
}

pub fn translation_matrix(xp: &[f64]) -> DMatrix<f64> {
    let m = translation_matrix_generic(xp);
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j])
}

/// Image of Z under a KAN-basis matrix acting on the projective model.
pub fn act_on_tube(g_kan: &DMatrix<f64>, z: &TubePoint) -> Result<TubePoint> {
    let b = z.b();
    let n = b + 2;
    let zc: Vec<Complex64> = z.x.iter().zip(&z.y).map(|(&a, &c)| Complex64::new(a, c)).collect();
    // q(Z) with the complex bilinear extension
    let mut qz = zc[0] * zc[b - 1];
    for v in &zc[1..b - 1] {
        qz += 0.5 * v * v;
    }
    let mut zl = vec![Complex64::new(0.0, 0.0); n];
    zl[0] = -qz;
    zl[1..=b].copy_from_slice(&zc);
    zl[n - 1] = Complex64::new(1.0, 0.0);
    let img: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| g_kan[(i, j)] * zl[j]).sum()).collect();
    let last = img[n - 1];
    if last.norm() < 1e-300 {
        return Err(Error::TubePoint("image has no tube coordinate".into()));
    }
    let k: Vec<Complex64> = img[1..=b].iter().map(|v| v / last).collect();
    TubePoint::new(k.iter().map(|v| v.re).collect(), k.iter().map(|v| v.im).collect())
}

/// Whether the w-maps of ψ(1, Z) and ψ(1, Z + X′) agree on λ (e-coordinates).
pub fn x_independence_check(z: &TubePoint, xp: &[f64], lam: &[f64]) -> Result<bool> {
    let z2 = z.translated(xp);
    let f1 = PointFrame::from_tube(z)?;
    let f2 = PointFrame::from_tube(&z2)?;
    let w1 = w_map(&psi(z)?, &f1, lam)?;
    let w2 = w_map(&psi(&z2)?, &f2, lam)?;
    let scale = 1.0 + lam.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(w1.iter().zip(&w2).all(|(a, c)| (a - c).abs() <= 1e-8 * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_point(b: usize) -> TubePoint {
        let mut z = TubePoint::base(b);
        for i in 0..b {
            z.x[i] = 0.1 * (i as f64 + 1.0) - 0.3;
            if i > 0 && i < b - 1 {
                z.y[i] = 0.05 * i as f64;
            }
        }
        z.y[0] = 1.3;
        z.y[b - 1] = -0.8;
        z.validate().unwrap();
        z
    }

    #[test]
    fn base_frame() {
        let b = 10;
        let f = PointFrame::from_tube(&TubePoint::base(b)).unwrap();
        let mut e_b = vec![0.0; b + 2];
        e_b[b - 1] = FRAC_1_SQRT_2;
        for (a, c) in f.u_zperp.iter().zip(&e_b) {
            assert!((a - c).abs() < 1e-15);
        }
        assert!((f.u_z[b + 1] - FRAC_1_SQRT_2).abs() < 1e-15);
        let z0 = [unit(b + 2, b), unit(b + 2, b + 1)];
        assert!(plane_distance([&f.z_basis[0], &f.z_basis[1]], [&z0[0], &z0[1]]) < 1e-14);
    }

    #[test]
    fn dictionary_identities() {
        let z = sample_point(10);
        let f = PointFrame::from_tube(&z).unwrap();
        let y2 = z.y_norm2();
        assert!((f.u_zperp_norm2() + 1.0 / y2).abs() < 1e-12);
        assert!((f.u_z_norm2() - 1.0 / y2).abs() < 1e-12);
        let kb = KanBasis::new(10);
        let xe = kb.k_to_e(&z.x);
        for (a, c) in f.mu_k.iter().zip(&xe) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn kan_basis_gram() {
        let kb = KanBasis::new(10);
        let g = kb.t.transpose() * metric(12) * &kb.t;
        assert!((g - kan_gram(10)).amax() < 1e-15);
        assert!((&kb.t * &kb.t_inv - DMatrix::identity(12, 12)).amax() < 1e-15);
    }

    #[test]
    fn n_and_translation_are_isometries() {
        let b = 10;
        let g = kan_gram(b);
        let x: Vec<f64> = (0..b - 2).map(|i| 0.3 * i as f64 - 1.0).collect();
        let y: Vec<f64> = (0..b - 2).map(|i| 0.2 - 0.1 * i as f64).collect();
        let n = n_matrix(0.7, -1.1, &x, &y);
        assert!((n.transpose() * &g * &n - &g).amax() < 1e-12);
        let xp: Vec<f64> = (0..b).map(|i| 0.25 * i as f64 - 0.9).collect();
        let m = translation_matrix(&xp);
        assert!((m.transpose() * &g * &m - &g).amax() < 1e-12);
    }

    #[test]
    fn kan_base_point_is_identity() {
        let f = kan_factors(&TubePoint::base(10)).unwrap();
        assert!((f.a - DMatrix::identity(12, 12)).amax() < 1e-15);
        assert!((f.n - DMatrix::identity(12, 12)).amax() < 1e-15);
        assert!((psi(&TubePoint::base(10)).unwrap().matrix - DMatrix::identity(12, 12)).amax() < 1e-15);
    }

    #[test]
    fn psi_scales_u() {
        let z = sample_point(10);
        let g = psi(&z).unwrap();
        let f = PointFrame::from_tube(&z).unwrap();
        let u = u_vec(10);
        let gu = g.apply(&u);
        let c = (f.u_zperp_norm2() / 0.5).sqrt();
        for (a, v) in gu.iter().zip(&u) {
            assert!((a - c * v).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_acts_by_addition() {
        let z = sample_point(10);
        let xp: Vec<f64> = (0..10).map(|i| 0.1 * i as f64 - 0.4).collect();
        let img = act_on_tube(&translation_matrix(&xp), &z).unwrap();
        let expect = z.translated(&xp);
        for i in 0..10 {
            assert!((img.x[i] - expect.x[i]).abs() < 1e-12);
            assert!((img.y[i] - expect.y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn x_independence() {
        let z = sample_point(10);
        let xp: Vec<f64> = (0..10).map(|i| 0.37 * i as f64 - 1.4).collect();
        let lam: Vec<f64> = (0..12).map(|i| if i == 9 || i == 11 { 0.0 } else { i as f64 - 4.0 }).collect();
        assert!(x_independence_check(&z, &xp, &lam).unwrap());
    }

    #[test]
    fn invalid_tube_points() {
        let mut z = TubePoint::base(10);
        z.y[9] = 1.0;
        z.y[0] = -1.0;
        assert!(matches!(z.validate(), Err(Error::TubePoint(_))));
        let mut z = TubePoint::base(10);
        z.y[3] = 5.0;
        assert!(matches!(kan_factors(&z), Err(Error::TubePoint(_))));
    }
}

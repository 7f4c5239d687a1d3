//! Two evaluations of the unfolded defining integral at ψ(1, X + iY):
//! quadrature of 2∫_{Γ∞\H} h dμ, and the truncated Fourier series in X.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fourier_coefficient, CoefficientMethod, CuspFormProxy, UnfoldContext};
use crate::error::Result;
use crate::geometry::{dot, psi, KanBasis, TubePoint};
use crate::lattice::{LatticeVector, RealBasisMap, SplitLattice};
use crate::quad::GaussLegendre;
use crate::sum::ComplexSum;
use crate::theta::{e, Truncation};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StripConfig {
    /// Trapezoid nodes in x ∈ [0, 1).
    pub n_x: usize,
    pub y_min: f64,
    pub y_max: f64,
    /// Log-spaced Gauss–Legendre panels in y.
    pub panels: usize,
    pub order: usize,
    /// Lattice vectors whose best-case weight is below e^{−log_cut} are dropped.
    pub log_cut: f64,
}

impl Default for StripConfig {
    fn default() -> Self {
        StripConfig { n_x: 128, y_min: 0.05, y_max: 12.0, panels: 48, order: 16, log_cut: 32.0 }
    }
}

impl StripConfig {
    /// Majorant radius R² keeping every λ whose y-integrand can exceed
    /// e^{−log_cut}: min_y (2πy λ_{w⊥}² + π/(2y u²)) = 2π|λ_{w⊥}|/|u_{z⊥}|.
    pub fn radius(&self, ctx: &UnfoldContext, n_min: i64) -> f64 {
        let a_cut = (self.log_cut * ctx.u_zperp_norm2.sqrt() / (2.0 * PI)).powi(2);
        (2.0 * a_cut - 2.0 * n_min as f64).max(1.0)
    }
}

fn y_nodes(cfg: &StripConfig) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(cfg.order);
    let (lo, hi) = (cfg.y_min.ln(), cfg.y_max.ln());
    let step = (hi - lo) / cfg.panels as f64;
    let mut out = Vec::with_capacity(cfg.panels * cfg.order);
    for p in 0..cfg.panels {
        let a = lo + step * p as f64;
        for (s, w) in gl.on(a, a + step) {
            let y = s.exp();
            // dy = y ds, dμ = dx dy / y²
            out.push((y, w / y));
        }
    }
    out
}

/// 2∫_0^∞∫_0^1 h_{αβ}(τ) dx dy/y². The x-rule is the N_x-point trapezoid,
/// summed in closed form: a lattice vector λ survives only against the
/// coefficients c_n with n ≡ q(λ) mod N_x. Returns the value and an
/// estimate of the y-window truncation.
pub fn strip_integral(ctx: &UnfoldContext, f: &CuspFormProxy, trunc: &Truncation, cfg: &StripConfig) -> Result<(Complex64, f64)> {
    let zero = Complex64::new(0.0, 0.0);
    if f.coefficients.iter().all(|c| c.norm() == 0.0) {
        return Ok((zero, 0.0));
    }
    let nx = cfg.n_x as i64;
    let k = f.weight as f64;
    let uzp2 = ctx.u_zperp_norm2;
    let pre = 2.0 / (2.0 * uzp2).sqrt();
    let b = ctx.b();
    let gram = ctx.model.gram.clone();
    let radius = if trunc.radius > 0.0 { trunc.radius } else { cfg.radius(ctx, 1) };
    let nheat = ctx.heats.iter().map(|h| h.len()).max().unwrap_or(1);
    // per node: y, the weight with y^{k+1/2}, powers of ν, exp(−πr²/(2yu²)) for each r,
    // and Σ_n c_n e^{−2πny} split by n
    struct Node {
        y: f64,
        base: f64,
        nu_pow: Vec<f64>,
        ex: Vec<f64>,
        fy: Vec<Complex64>,
    }
    let nodes: Vec<Node> = y_nodes(cfg)
        .into_iter()
        .map(|(y, w)| {
            let nu = 1.0 / (4.0 * PI * y);
            Node {
                y,
                base: y.powf(k + 0.5) * pre * w,
                nu_pow: (0..nheat).map(|m| nu.powi(m as i32)).collect(),
                ex: (1..=trunc.r_bound).map(|r| (-PI * (r * r) as f64 / (2.0 * y * uzp2)).exp()).collect(),
                fy: (1..=f.n_max() as i64).map(|n| f.coefficient(n) * (-2.0 * PI * n as f64 * y).exp()).collect(),
            }
        })
        .collect();
    // terms below e^{−cut} relative to the largest possible weight are skipped
    let cut = (-(cfg.log_cut + 40.0)).exp();
    let parts = ctx.model.fold_points(
        &vec![0.0; b],
        radius,
        || (ComplexSum::new(), 0.0f64),
        |acc, c, x| {
            let mut two_q = 0i64;
            for i in 0..b {
                for j in 0..b {
                    two_q += c[i] * gram[(i, j)] as i64 * c[j];
                }
            }
            let q = two_q / 2;
            let ns: Vec<usize> = (1..=f.n_max() as i64).filter(|n| (n - q).rem_euclid(nx) == 0).map(|n| n as usize - 1).collect();
            if ns.is_empty() {
                return;
            }
            let lam: Vec<f64> = c.iter().map(|&v| v as f64).collect();
            let s = ctx.pairing_mu(&lam);
            let phases: Vec<Complex64> = (1..=trunc.r_bound).map(|r| e(r as f64 * s)).collect();
            let x2: f64 = x.iter().map(|v| v * v).sum();
            let hv: Vec<Vec<f64>> = (0..3).map(|h| ctx.heat_values(h, x)).collect();
            let last = nodes.len() - 1;
            for (idx, nd) in nodes.iter().enumerate() {
                let g = (-PI * nd.y * x2).exp();
                if g * nd.ex[0] < cut {
                    continue;
                }
                let heat = |h: usize| hv[h].iter().zip(&nd.nu_pow).map(|(a, p)| a * p).sum::<f64>();
                let (h0, h1, h2) = (heat(0), heat(1), heat(2));
                let fy: Complex64 = ns.iter().map(|&n| nd.fy[n]).sum();
                let mut inner = Complex64::new(0.0, 0.0);
                for (ri, &ex) in nd.ex.iter().enumerate() {
                    if g * ex < cut {
                        break;
                    }
                    let f1 = Complex64::new(0.0, -((ri + 1) as f64) / (2.0 * nd.y));
                    inner += (f1 * (f1 * h2 + h1) + h0) * ex * phases[ri];
                }
                let v = fy * inner * (nd.base * g);
                acc.0.add(v);
                if idx == 0 || idx == last {
                    acc.1 += v.norm();
                }
            }
        },
    )?;
    let mut total = ComplexSum::new();
    let mut edge = 0.0;
    for (s, t) in &parts {
        total.merge(s);
        edge += t;
    }
    Ok((total.value(), edge))
}

/// Σ_{ν: (ν,ν)_w ≤ R²} c(ν) e((ν, X)) with X in tube K-coordinates.
pub fn fourier_series(
    ctx: &UnfoldContext,
    f: &CuspFormProxy,
    x: &[f64],
    radius: f64,
    method: CoefficientMethod,
) -> Result<Complex64> {
    let b = ctx.b();
    let gram = ctx.model.gram.clone();
    let nmax = f.n_max() as i64;
    let cand = ctx.model.fold_points(&vec![0.0; b], radius, Vec::new, |acc: &mut Vec<Vec<i64>>, c, _| {
        let mut two_q = 0i64;
        for i in 0..b {
            for j in 0..b {
                two_q += c[i] * gram[(i, j)] as i64 * c[j];
            }
        }
        let content = c.iter().fold(0i64, |g, &v| num_integer::Integer::gcd(&g, &v));
        if two_q > 0 && two_q / 2 <= nmax * content * content {
            acc.push(c.to_vec());
        }
    })?;
    let cand: Vec<Vec<i64>> = cand.into_iter().flatten().collect();
    let kb = KanBasis::new(b);
    let xe = kb.k_to_e(x);
    let n = b + 2;
    let jx: Vec<f64> = (0..n).map(|i| if i < b { xe[i] } else { -xe[i] }).collect();
    let gk = ctx.g0.k_block(b);
    let vals = crate::par::map_ordered(&cand, |c| -> Result<Complex64> {
        let coef = fourier_coefficient(ctx, &LatticeVector::new(c.clone()), f, method)?;
        let ve: Vec<f64> = (0..n).map(|i| (0..b).map(|j| gk[(i, j)] * c[j] as f64).sum()).collect();
        Ok(coef.value * e(dot(&ve, &jx)))
    });
    let mut total = ComplexSum::new();
    for v in vals {
        total.add(v?);
    }
    Ok(total.value())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub x: Vec<f64>,
    pub quadrature: Complex64,
    pub series: Complex64,
    pub edge_estimate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub rows: Vec<ExpansionRow>,
    pub max_residual: f64,
    /// max |a − b| / max |a|.
    pub relative_residual: f64,
}

/// For each X: quadrature of the strip integral at ψ(1, X + iY) against the
/// truncated Fourier series.
#[allow(clippy::too_many_arguments)]
pub fn expansion_vs_quadrature(
    split: &SplitLattice,
    g0: &RealBasisMap,
    f: &CuspFormProxy,
    alpha: usize,
    beta: usize,
    y: &[f64],
    x_samples: &[Vec<f64>],
    trunc: &Truncation,
    cfg: &StripConfig,
) -> Result<ExpansionReport> {
    let mut rows = Vec::new();
    for x in x_samples {
        let z = TubePoint::new(x.clone(), y.to_vec())?;
        let ctx = UnfoldContext::new(split, g0, &psi(&z)?, alpha, beta)?;
        let (a, edge) = strip_integral(&ctx, f, trunc, cfg)?;
        let radius = if trunc.radius > 0.0 { trunc.radius } else { cfg.radius(&ctx, 1) };
        let bsum = fourier_series(&ctx, f, x, radius, CoefficientMethod::Bessel)?;
        rows.push(ExpansionRow { x: x.clone(), quadrature: a, series: bsum, edge_estimate: edge });
    }
    let max_residual = rows.iter().map(|r| (r.quadrature - r.series).norm()).fold(0.0, f64::max);
    let scale = rows.iter().map(|r| r.quadrature.norm()).fold(0.0, f64::max);
    let relative_residual = if scale > 0.0 { max_residual / scale } else { max_residual };
    Ok(ExpansionReport { rows, max_residual, relative_residual })
}

//! F_{α,β}(τ, g) = y Θ_L(τ, g, P_{α,β}) and its expansion as a sum of shifted
//! theta functions of K.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{coprime_pairs, e, eval_heat, gaussian_phase, heat_size, siegel_theta, ThetaInput, ThetaModel, ThetaValue, Truncation};
use crate::error::{Error, Result};
use crate::geometry::{Isometry, PointFrame};
use crate::lattice::{RealBasisMap, SplitLattice};
use crate::polynomials::{decompose_exact, p_alpha_beta, CompiledPoly, ExactFrame};
use crate::sum::{ComplexSum, Neumaier};

/// Terms with a Gaussian factor below this are dropped.
pub const SPLIT_SKIP: f64 = 1e-20;

/// y Θ_L(τ, g, P_{α,β}).
pub fn f_alpha_beta(
    split: &SplitLattice,
    g0: &RealBasisMap,
    g: &Isometry,
    alpha: usize,
    beta: usize,
    tau: Complex64,
    trunc: &Truncation,
) -> Result<ThetaValue> {
    let model = ThetaModel::l_model(split, g0, g)?;
    let p = p_alpha_beta::<f64>(alpha, beta, split.b)?;
    let mut t = trunc.clone();
    t.tail_target /= tau.im;
    let v = siegel_theta(&ThetaInput::new(model, tau, p, t))?;
    Ok(ThetaValue { value: v.value * tau.im, tail_estimate: v.tail_estimate * tau.im, abs_sum: v.abs_sum * tau.im, ..v })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitReport {
    pub value: Complex64,
    /// The term with p₀ and no shift.
    pub constant_part: Complex64,
    /// Bound on the lattice tails of all retained theta sums.
    pub tail: f64,
    /// Σ of the weights of (c, d, r) just outside the enumerated range; a
    /// diagnostic for the pair truncation.
    pub omitted_weight: f64,
    pub terms: usize,
    pub points: u64,
}

/// Lattice coordinates in K of a vector of K ⊗ R given in e-coordinates.
pub fn k_coords(split: &SplitLattice, g0: &RealBasisMap, v: &[f64]) -> Result<Vec<f64>> {
    let b = split.b;
    let gk = g0.k_block(b);
    let gram = split.k.gram_f64();
    let gi = gram.try_inverse().ok_or_else(|| Error::Degenerate("singular Gram".into()))?;
    let n = b + 2;
    let pair: Vec<f64> = (0..b)
        .map(|j| (0..n).map(|i| gk[(i, j)] * if i < b { v[i] } else { -v[i] }).sum())
        .collect();
    Ok((0..b).map(|i| (0..b).map(|j| gi[(i, j)] * pair[j]).sum()).collect())
}

struct Member {
    /// Multiplier of (λ + β/2, μ) in the extra phase.
    rd: f64,
    weights: [Complex64; 3],
}

/// The right-hand side: with pre = √y/√(2u_{z⊥}²),
/// pre Θ_K(τ, 0, 0, p₀) + pre Σ_{(c,d)=1} Σ_{r≥1} Σ_h (−r/(2iy))^h (cτ̄+d)^h
/// exp(−πr²|cτ+d|²/(2y u_{z⊥}²)) Θ_K(τ, rdμ_K, −rcμ_K, p_h).
pub fn split_rhs(
    split: &SplitLattice,
    g0: &RealBasisMap,
    g: &Isometry,
    alpha: usize,
    beta: usize,
    tau: Complex64,
    trunc: &Truncation,
) -> Result<SplitReport> {
    let b = split.b;
    let y = tau.im;
    if !(y > 0.0) {
        return Err(Error::Invalid("Im tau must be positive".into()));
    }
    let frame = PointFrame::from_isometry(g)?;
    let w = frame.w_matrix(g)?;
    let model = ThetaModel::k_model(split, g0, &w)?;
    let ef = ExactFrame::<f64>::from_isometry(&g.to_rows())?;
    let dec = decompose_exact(alpha, beta, &ef)?;
    let heats: Vec<Vec<CompiledPoly>> = dec.heat_on_image(&ef).iter().map(|h| h.compile()).collect();
    let sizes: Vec<(f64, i32)> = heats.iter().map(|h| heat_size(h, y)).collect();
    let uzp2 = ef.u_zperp_norm2;
    let pre = y.sqrt() / (2.0 * uzp2).sqrt();
    let mu = k_coords(split, g0, &frame.mu_k)?;
    let mu_pair: Vec<f64> = (0..b).map(|i| (0..b).map(|j| model.gram[(i, j)] * mu[j]).sum()).collect();
    let mu2: f64 = mu.iter().zip(&mu_pair).map(|(a, p)| a * p).sum();

    // Group by m = rc: all members share the shift β = −mμ.
    let mut groups: BTreeMap<i64, Vec<Member>> = BTreeMap::new();
    let zero = Complex64::new(0.0, 0.0);
    groups.entry(0).or_default().push(Member { rd: 0.0, weights: [Complex64::new(pre, 0.0), zero, zero] });
    let weight = |c: i64, d: i64, r: i64| -> (f64, [Complex64; 3]) {
        let ct = tau * c as f64 + d as f64;
        let ex = (-PI * (r * r) as f64 * ct.norm_sqr() / (2.0 * y * uzp2)).exp();
        let f = Complex64::new(0.0, r as f64 / (2.0 * y)) * (tau.conj() * c as f64 + d as f64);
        (ex, [Complex64::new(pre * ex, 0.0), f * pre * ex, f * f * pre * ex])
    };
    let mut terms = 1;
    let mut omitted = 0.0;
    for (c, d) in coprime_pairs(2 * trunc.cd_bound) {
        for r in 1..=2 * trunc.r_bound {
            let (ex, ws) = weight(c, d, r);
            if ex < SPLIT_SKIP {
                continue;
            }
            if c.abs() > trunc.cd_bound || d.abs() > trunc.cd_bound || r > trunc.r_bound {
                omitted += ws.iter().map(|w| w.norm()).fold(0.0, f64::max);
                continue;
            }
            groups.entry(r * c).or_default().push(Member { rd: (r * d) as f64, weights: ws });
            terms += 1;
        }
    }

    let nu = 1.0 / (4.0 * PI * y);
    let p_amb = model.p_amb;
    let ngroups = groups.len() as f64;
    let mut total = ComplexSum::new();
    let mut tail = Neumaier::new();
    let mut points = 0;
    for (m, members) in &groups {
        let beta_shift: Vec<f64> = mu.iter().map(|v| -(*m as f64) * v).collect();
        // (λ + β/2, μ) = (λ, μ) − m μ²/2
        let s0 = -0.5 * *m as f64 * mu2;
        let mut size = (0.0, 0);
        for mem in members {
            for h in 0..3 {
                size.0 += mem.weights[h].norm() * sizes[h].0;
                size.1 = size.1.max(sizes[h].1);
            }
        }
        let radius = if trunc.radius > 0.0 { trunc.radius } else { model.auto_radius(y, size, trunc.tail_target / ngroups) };
        let parts = model.fold_points(
            &beta_shift,
            radius,
            || (ComplexSum::new(), 0u64),
            |acc, c, x| {
                let (gauss, re_phase) = gaussian_phase(x, p_amb, tau);
                let base = e(re_phase) * gauss;
                let hv = [eval_heat(&heats[0], nu, x), eval_heat(&heats[1], nu, x), eval_heat(&heats[2], nu, x)];
                let s = s0 + c.iter().zip(&mu_pair).map(|(&ci, p)| ci as f64 * p).sum::<f64>();
                let mut t = Complex64::new(0.0, 0.0);
                for mem in members {
                    let inner = mem.weights[0] * hv[0] + mem.weights[1] * hv[1] + mem.weights[2] * hv[2];
                    t += inner * e(-mem.rd * s);
                }
                acc.0.add(t * base);
                acc.1 += 1;
            },
        )?;
        for (s, p) in &parts {
            total.merge(s);
            points += p;
        }
        tail.add(model.tail_bound(y, size, radius));
    }
    let constant_part = {
        let mut s = ComplexSum::new();
        let parts = model.fold_points(
            &vec![0.0; b],
            if trunc.radius > 0.0 { trunc.radius } else { model.auto_radius(y, (pre * sizes[0].0, sizes[0].1), trunc.tail_target) },
            ComplexSum::new,
            |acc, _, x| {
                let (gauss, re_phase) = gaussian_phase(x, p_amb, tau);
                acc.add(e(re_phase) * (gauss * pre * eval_heat(&heats[0], nu, x)));
            },
        )?;
        for p in &parts {
            s.merge(p);
        }
        s.value()
    };
    Ok(SplitReport { value: total.value(), constant_part, tail: tail.value(), omitted_weight: omitted, terms, points })
}

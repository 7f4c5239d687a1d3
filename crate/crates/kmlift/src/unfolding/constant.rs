//! Constant term: the integral of y^{k+1/2} f(τ) conj Θ_K(τ, w, p₀)/(√2|u_{z⊥}|)
//! over the fundamental domain cut at y ≤ Y_max.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CuspFormProxy, UnfoldContext};
use crate::error::Result;
use crate::quad::GaussLegendre;
use crate::special::gamma;
use crate::sum::{ComplexSum, Neumaier};
use crate::theta::heat_size;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantTermConfig {
    pub y_max: f64,
    /// Gauss–Legendre nodes on the cap √3/2 ≤ y ≤ 1.
    pub cap_order: usize,
    /// Log-spaced panels on 1 ≤ y ≤ Y_max.
    pub panels: usize,
    pub order: usize,
    pub tail_target: f64,
}

impl Default for ConstantTermConfig {
    fn default() -> Self {
        ConstantTermConfig { y_max: 8.0, cap_order: 32, panels: 16, order: 16, tail_target: 1e-13 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConstantTerm {
    pub value: Complex64,
    /// Bound on ∫_{y > Y_max}.
    pub y_max_tail: f64,
    /// Bound on the dropped lattice vectors.
    pub lattice_tail: f64,
}

/// ∫ e(m x) dx over {|x| ≤ ½, x² ≥ 1 − y²}.
fn x_weight(m: i64, y: f64) -> f64 {
    let a = if y >= 1.0 { 0.0 } else { (1.0 - y * y).sqrt() };
    if m == 0 {
        1.0 - 2.0 * a
    } else {
        -(2.0 * PI * m as f64 * a).sin() / (PI * m as f64)
    }
}

/// Integrates x exactly for each lattice vector (the integrand is a finite
/// sum of e((n − q(λ))x) terms) and y by Gauss–Legendre: y = cos θ on the
/// cap, log-spaced panels above y = 1.
pub fn constant_term(ctx: &UnfoldContext, f: &CuspFormProxy, cfg: &ConstantTermConfig) -> Result<ConstantTerm> {
    let zero = Complex64::new(0.0, 0.0);
    if f.coefficients.iter().all(|c| c.norm() == 0.0) {
        return Ok(ConstantTerm { value: zero, y_max_tail: 0.0, lattice_tail: 0.0 });
    }
    let k = f.weight as f64;
    let b = ctx.b();
    let pre = 1.0 / (2.0 * ctx.u_zperp_norm2).sqrt();
    let mut cap = Vec::new();
    for (t, w) in GaussLegendre::new(cfg.cap_order).on(0.0, PI / 6.0) {
        cap.push((t.cos(), w * t.sin()));
    }
    let mut rect = Vec::new();
    let step = cfg.y_max.ln() / cfg.panels as f64;
    let gl = GaussLegendre::new(cfg.order);
    for p in 0..cfg.panels {
        for (s, w) in gl.on(step * p as f64, step * (p + 1) as f64) {
            let y = s.exp();
            rect.push((y, w * y));
        }
    }
    let y0 = 0.75f64.sqrt();
    let cabs = f.abs_bound(0.0);
    let size = heat_size(&ctx.heats[0], y0);
    let radius = ctx.model.auto_radius(y0, (size.0 * cabs, size.1), cfg.tail_target);
    let gram = ctx.model.gram.clone();
    let nmax = f.n_max() as i64;
    let nheat = ctx.heats[0].len();
    // per node: y, w y^{k−3/2} ν^m for each heat order m
    let node_data = |nodes: &[(f64, f64)]| -> Vec<(f64, Vec<f64>)> {
        nodes
            .iter()
            .map(|&(y, w)| {
                let nu = 1.0 / (4.0 * PI * y);
                let base = w * y.powf(k - 1.5);
                (y, (0..nheat).map(|m| base * nu.powi(m as i32)).collect())
            })
            .collect()
    };
    let cap_nodes = node_data(&cap);
    let rect_nodes = node_data(&rect);
    // |q(λ)| ≤ (λ,λ)_w / 2 ≤ R²/2
    let qmax = (radius / 2.0).ceil() as i64 + 1;
    let cap_tables: Vec<Vec<Complex64>> = (-qmax..=qmax)
        .map(|q| {
            cap.iter()
                .map(|&(y, _)| {
                    let mut s = Complex64::new(0.0, 0.0);
                    for n in 1..=nmax {
                        let c = f.coefficient(n);
                        if c.norm() != 0.0 {
                            s += c * ((-2.0 * PI * n as f64 * y).exp() * x_weight(n - q, y));
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let parts = ctx.model.fold_points(
        &vec![0.0; b],
        radius,
        || (ComplexSum::new(), Neumaier::new()),
        |acc, c, x| {
            let mut two_q = 0i64;
            for i in 0..b {
                for j in 0..b {
                    two_q += c[i] * gram[(i, j)] as i64 * c[j];
                }
            }
            let q = two_q / 2;
            let x2: f64 = x.iter().map(|v| v * v).sum();
            let hv = ctx.heat_values(0, x);
            let table = &cap_tables[(q + qmax) as usize];
            let mut s = Complex64::new(0.0, 0.0);
            for (i, (y, pw)) in cap_nodes.iter().enumerate() {
                let h: f64 = hv.iter().zip(pw).map(|(a, b)| a * b).sum();
                s += table[i] * ((-PI * y * x2).exp() * h);
            }
            acc.0.add(s);
            if q >= 1 && q <= nmax {
                let c = f.coefficient(q);
                if c.norm() != 0.0 {
                    let mut r = 0.0;
                    for (y, pw) in &rect_nodes {
                        let h: f64 = hv.iter().zip(pw).map(|(a, b)| a * b).sum();
                        r += h * (-PI * y * (x2 + 2.0 * q as f64)).exp();
                    }
                    acc.0.add(c * r);
                    let nu = 1.0 / (4.0 * PI * cfg.y_max);
                    let habs = hv.iter().rev().fold(0.0, |a, v| a * nu + v.abs());
                    acc.1.add(c.norm() * habs * (-PI * cfg.y_max * x2).exp());
                }
            }
        },
    )?;
    let mut total = ComplexSum::new();
    let mut edge = Neumaier::new();
    for (s, t) in &parts {
        total.merge(s);
        edge.merge(t);
    }
    // beyond Y_max only q(λ) = n survives the x-integral, and for n ≥ 1
    // ∫_{Y_max}^∞ y^{k−3/2} e^{−2πny} dy ≤ Γ(k − ½, 2πY_max)/(2π)^{k−½}
    let a = k - 0.5;
    let ym = cfg.y_max;
    let inc = statrs::function::gamma::gamma_ur(a, 2.0 * PI * ym) * gamma(a) / (2.0 * PI).powf(a);
    let y_max_tail = pre * (edge.value() + cabs * ctx.model.tail_bound(ym, size, radius)) * inc;
    // dropped λ: the x-weight is at most 1 and the Gaussian tail only shrinks with y
    let lattice_tail = pre * ctx.model.tail_bound(y0, (size.0 * cabs, size.1), radius) * ym.powf(k - 0.5);
    Ok(ConstantTerm { value: total.value() * pre, y_max_tail, lattice_tail })
}

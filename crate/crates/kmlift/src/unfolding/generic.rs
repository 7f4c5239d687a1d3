//! The unfolding identity on h(τ) = y^s e^{−y}: the integral over the
//! fundamental domain of Σ_{(c,d)=1} h(γτ) equals 2∫_{strip} h dμ = 2Γ(s−1).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive, AdaptiveConfig};
use crate::special::gamma;
use crate::theta::coprime_pairs;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct UnfoldCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Σ over coprime (c, d) with |c|, |d| ≤ C, both signs, of Im(γτ)^s e^{−Im(γτ)};
/// `pairs` holds one of each ± pair.
fn coset_sum(pairs: &[(i64, i64)], s: f64, tau: Complex64) -> f64 {
    let mut acc = crate::sum::Neumaier::new();
    for &(c, d) in pairs {
        let ct = tau * c as f64 + d as f64;
        let yy = tau.im / ct.norm_sqr();
        acc.add(yy.powf(s) * (-yy).exp());
    }
    2.0 * acc.value()
}

/// Outer integral over x ∈ [−½, ½]; inner over y ≥ √(1 − x²), with
/// t = 1/y above y = 1 so that dμ = dx dt there.
pub fn generic_unfold_check(s: f64, coset_bound: i64, cfg: &AdaptiveConfig) -> Result<UnfoldCheck> {
    if !(s > 1.0) {
        return Err(Error::Invalid(format!("s = {s} must exceed 1")));
    }
    let pairs: Vec<(i64, i64)> = coprime_pairs(coset_bound).into_iter().filter(|&(c, d)| c > 0 || (c == 0 && d > 0)).collect();
    let inner = |x: f64| {
        let y0 = (1.0 - x * x).sqrt();
        let low = adaptive(|y| coset_sum(&pairs, s, Complex64::new(x, y)) / (y * y), y0, 1.0, cfg).value;
        let high = adaptive(
            |t| if t <= 0.0 { 0.0 } else { coset_sum(&pairs, s, Complex64::new(x, 1.0 / t)) },
            0.0,
            1.0,
            cfg,
        )
        .value;
        low + high
    };
    // the integrand is even in x
    let lhs = 2.0 * adaptive(inner, 0.0, 0.5, cfg).value;
    let rhs = 2.0 * gamma(s - 1.0);
    Ok(UnfoldCheck { lhs, rhs, residual: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_values() {
        let cfg = AdaptiveConfig { order: 10, abs_tol: 1e-6, rel_tol: 1e-6, max_depth: 8 };
        assert!(generic_unfold_check(1.0, 5, &cfg).is_err());
        let r = generic_unfold_check(3.0, 4, &cfg).unwrap();
        assert!((r.rhs - 2.0).abs() < 1e-14);
        assert!(r.lhs < r.rhs && r.lhs > 1.0);
    }
}

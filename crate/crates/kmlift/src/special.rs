//! Special functions: Γ (from statrs) and the modified Bessel function K_ν of
//! real order, used in closed form for ∫_0^∞ y^{s-1} e^{-Ay-B/y} dy.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Taylor coefficients of 1/Γ(1+x) = Σ_j C[j] x^j.
const RECIP_GAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// 1/Γ(1+x) for |x| ≤ 1/2.
pub fn recip_gamma_1p(x: f64) -> f64 {
    RECIP_GAMMA.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Temme's auxiliary values for |mu| ≤ 1/2:
/// g1 = (1/Γ(1-μ) − 1/Γ(1+μ)) / 2μ, g2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2.
fn temme_g(mu: f64) -> (f64, f64) {
    // g1 = −Σ_{j odd} c_j μ^{j-1}, g2 = Σ_{j even} c_j μ^j
    let m2 = mu * mu;
    let odd = RECIP_GAMMA.iter().skip(1).step_by(2).rev().fold(0.0, |acc, &c| acc * m2 + c);
    let even = RECIP_GAMMA.iter().step_by(2).rev().fold(0.0, |acc, &c| acc * m2 + c);
    (-odd, even)
}

/// Returns (e^x K_mu(x), e^x K_{mu+1}(x)) for |mu| ≤ 1/2 and 0 < x ≤ 2.
fn k_temme_scaled(mu: f64, x: f64) -> (f64, f64) {
    let half_x = 0.5 * x;
    let ln_half_x = half_x.ln();
    let half_x_mu = (mu * ln_half_x).exp();
    let pi_mu = PI * mu;
    let sigma = -mu * ln_half_x;
    let sinrat = if pi_mu.abs() < f64::EPSILON { 1.0 } else { pi_mu / pi_mu.sin() };
    let sinhrat = if sigma.abs() < f64::EPSILON { 1.0 } else { sigma.sinh() / sigma };
    let (g1, g2) = temme_g(mu);
    let r_p = recip_gamma_1p(mu);
    let r_m = recip_gamma_1p(-mu);
    let mut fk = sinrat * (sigma.cosh() * g1 - sinhrat * ln_half_x * g2);
    let mut pk = 0.5 / half_x_mu / r_p;
    let mut qk = 0.5 * half_x_mu / r_m;
    let mut hk = pk;
    let mut ck = 1.0;
    let mut sum0 = fk;
    let mut sum1 = hk;
    for k in 1..10_000 {
        let kf = k as f64;
        fk = (kf * fk + pk + qk) / (kf * kf - mu * mu);
        ck *= half_x * half_x / kf;
        pk /= kf - mu;
        qk /= kf + mu;
        hk = -kf * fk + pk;
        let d0 = ck * fk;
        let d1 = ck * hk;
        sum0 += d0;
        sum1 += d1;
        if d0.abs() < 0.5 * sum0.abs() * f64::EPSILON && d1.abs() < 0.5 * sum1.abs() * f64::EPSILON {
            break;
        }
    }
    let ex = x.exp();
    (sum0 * ex, sum1 * 2.0 / x * ex)
}

/// Steed's continued fraction; returns (e^x K_mu(x), e^x K_{mu+1}(x)), x > 2.
fn k_steed_scaled(mu: f64, x: f64) -> (f64, f64) {
    let mut bi = 2.0 * (1.0 + x);
    let mut di = 1.0 / bi;
    let mut delhi = di;
    let mut hi = di;
    let mut qi = 0.0;
    let mut qip1 = 1.0;
    let mut ai = -(0.25 - mu * mu);
    let a1 = ai;
    let mut ci = -ai;
    let mut bqi = -ai;
    let mut s = 1.0 + bqi * delhi;
    for i in 2..100_000 {
        ai -= 2.0 * (i - 1) as f64;
        ci = -ai * ci / i as f64;
        let tmp = (qi - bi * qip1) / ai;
        qi = qip1;
        qip1 = tmp;
        bqi += ci * qip1;
        bi += 2.0;
        di = 1.0 / (bi + ai * di);
        delhi *= bi * di - 1.0;
        hi += delhi;
        let dels = bqi * delhi;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    hi *= -a1;
    let k_mu = (PI / (2.0 * x)).sqrt() / s;
    let k_mu1 = k_mu * (mu + x + 0.5 - hi) / x;
    (k_mu, k_mu1)
}

/// e^x K_ν(x) for real ν and x > 0.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "K_nu needs x > 0");
    let nu = nu.abs();
    let n = (nu + 0.5).floor();
    let mu = nu - n;
    let (mut k0, mut k1) = if x <= 2.0 { k_temme_scaled(mu, x) } else { k_steed_scaled(mu, x) };
    for j in 0..n as usize {
        let k2 = 2.0 * (mu + j as f64 + 1.0) / x * k1 + k0;
        k0 = k1;
        k1 = k2;
    }
    k0
}

/// K_ν(x).
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    bessel_k_scaled(nu, x) * (-x).exp()
}

/// Closed form of K_{n+1/2}(x) as a finite sum.
pub fn bessel_k_half_integer(n: u32, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 0..=n {
        if k > 0 {
            // (n+k)!/(k!(n−k)!) updated from k−1
            term *= ((n + k) as f64) * ((n - k + 1) as f64) / (k as f64) / (2.0 * x);
        }
        sum += term;
    }
    (PI / (2.0 * x)).sqrt() * (-x).exp() * sum
}

/// ∫_0^∞ y^{s-1} exp(−A y − B/y) dy = 2 (B/A)^{s/2} K_s(2√(AB)), A, B > 0.
pub fn bessel_integral(s: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "bessel_integral needs A, B > 0");
    let x = 2.0 * (a * b).sqrt();
    2.0 * (0.5 * s * (b / a).ln() - x).exp() * bessel_k_scaled(s, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recip_gamma_series_matches_gamma() {
        for &x in &[-0.5, -0.3, -0.01, 0.0, 0.2, 0.5] {
            let expect = 1.0 / gamma(1.0 + x);
            assert!((recip_gamma_1p(x) - expect).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn temme_g_values() {
        for &mu in &[-0.5, -0.25, 0.1, 0.5] {
            let (g1, g2) = temme_g(mu);
            let rp = 1.0 / gamma(1.0 + mu);
            let rm = 1.0 / gamma(1.0 - mu);
            assert!((g1 - (rm - rp) / (2.0 * mu)).abs() < 1e-13);
            assert!((g2 - 0.5 * (rm + rp)).abs() < 1e-14);
        }
        let (g1, g2) = temme_g(0.0);
        assert!((g1 + 0.577_215_664_901_532_9).abs() < 1e-15);
        assert!((g2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_integer_orders_match_closed_form() {
        for n in 0..8u32 {
            for &x in &[0.05, 0.7, 1.9, 2.0, 2.1, 5.0, 30.0] {
                let a = bessel_k(n as f64 + 0.5, x);
                let b = bessel_k_half_integer(n, x);
                assert!(((a - b) / b).abs() < 1e-13, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn integer_order_reference_values() {
        // K_0(1), K_1(1), K_0(3) from standard tables
        assert!((bessel_k(0.0, 1.0) - 0.421_024_438_240_708_3).abs() < 1e-14);
        assert!((bessel_k(1.0, 1.0) - 0.601_907_230_197_234_6).abs() < 1e-14);
        assert!((bessel_k(0.0, 3.0) - 0.034_739_504_386_279_06).abs() < 1e-15);
    }

    #[test]
    fn identity_at_a_sample_point() {
        // s = 1/2: ∫ y^{-1/2} e^{-Ay-B/y} dy = √(π/A) e^{-2√(AB)}
        let (a, b) = (1.3, 0.4);
        let closed = (PI / a).sqrt() * (-2.0 * (a * b).sqrt()).exp();
        assert!((bessel_integral(0.5, a, b) - closed).abs() < 1e-14);
    }
}

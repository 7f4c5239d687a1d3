//! Exact scalars: the field Q(√2) and the coefficient trait shared by the
//! polynomial code.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Field operations needed by [`crate::polynomials::MultiPoly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// The constant √2.
    fn sqrt2() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Division; panics on a zero divisor for exact types.
    fn div(&self, o: &Self) -> Self;
    fn to_f64(&self) -> f64;
    /// Text form used by the canonical polynomial printer.
    fn render(&self) -> String;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn sqrt2() -> Self {
        std::f64::consts::SQRT_2
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

/// An element a + b√2 with a, b rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub a: BigRational,
    pub b: BigRational,
}

impl QSqrt2 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QSqrt2 { a, b }
    }

    pub fn rational(a: BigRational) -> Self {
        QSqrt2 { a, b: BigRational::zero() }
    }

    pub fn int(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }

    /// (a, b) with a = an/ad, b = bn/bd.
    pub fn from_parts(an: i64, ad: i64, bn: i64, bd: i64) -> Self {
        QSqrt2 {
            a: BigRational::new(an.into(), ad.into()),
            b: BigRational::new(bn.into(), bd.into()),
        }
    }

    /// Galois conjugate a − b√2.
    pub fn conj(&self) -> Self {
        QSqrt2 { a: self.a.clone(), b: -self.b.clone() }
    }

    /// Field norm a² − 2b².
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(2.into()) * &self.b * &self.b
    }

    pub fn inv(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero in Q(sqrt2)");
        let c = self.conj();
        QSqrt2 { a: c.a / &n, b: c.b / n }
    }

    /// Sign of the real number a + b√2, decided exactly.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sa == 0 {
            return sb;
        }
        if sb == 0 || sa == sb {
            return sa;
        }
        // opposite signs: compare a² with 2b²
        let a2 = &self.a * &self.a;
        let b2 = BigRational::from_integer(2.into()) * &self.b * &self.b;
        if a2 > b2 {
            sa
        } else if a2 < b2 {
            sb
        } else {
            0
        }
    }
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale down huge numerators/denominators before dividing
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

fn render_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", render_ratio(&self.a)),
            (true, false) => write!(f, "{}*sqrt2", render_ratio(&self.b)),
            (false, false) => {
                if self.b.is_negative() {
                    write!(f, "{} - {}*sqrt2", render_ratio(&self.a), render_ratio(&-self.b.clone()))
                } else {
                    write!(f, "{} + {}*sqrt2", render_ratio(&self.a), render_ratio(&self.b))
                }
            }
        }
    }
}

impl fmt::Debug for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &QSqrt2 {
    type Output = QSqrt2;
    fn add(self, o: &QSqrt2) -> QSqrt2 {
        QSqrt2 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for &QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, o: &QSqrt2) -> QSqrt2 {
        QSqrt2 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl Mul for &QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, o: &QSqrt2) -> QSqrt2 {
        let two = BigRational::from_integer(2.into());
        QSqrt2 {
            a: &self.a * &o.a + two * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Div for &QSqrt2 {
    type Output = QSqrt2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &QSqrt2) -> QSqrt2 {
        self * &o.inv()
    }
}

impl Neg for &QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl Coeff for QSqrt2 {
    fn zero() -> Self {
        QSqrt2::int(0)
    }
    fn one() -> Self {
        QSqrt2::int(1)
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn from_i64(v: i64) -> Self {
        QSqrt2::int(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        QSqrt2::rational(BigRational::new(num.into(), den.into()))
    }
    fn sqrt2() -> Self {
        QSqrt2::from_parts(0, 1, 1, 1)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.a) + std::f64::consts::SQRT_2 * ratio_to_f64(&self.b)
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

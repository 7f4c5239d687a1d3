//! Compensated (Neumaier) accumulation for real and complex sums.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum of a slice, in slice order.
pub fn sum_f64(xs: &[f64]) -> f64 {
    let mut acc = Neumaier::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum_f64(&xs), 2.0);
    }

    #[test]
    fn complex_parts_are_independent() {
        let mut s = ComplexSum::new();
        s.add(Complex64::new(1e16, 1.0));
        s.add(Complex64::new(1.0, -1.0));
        s.add(Complex64::new(-1e16, 0.5));
        assert_eq!(s.value(), Complex64::new(1.0, 0.5));
    }
}

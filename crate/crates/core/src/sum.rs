//! Compensated accumulation.
//!
//! Huygens sums add thousands of unit-modulus terms per screen sample; the
//! Neumaier accumulator keeps the rounding error independent of term count.
//! Results depend only on the order in which terms are pushed, so a fixed
//! iteration order gives bit-stable sums regardless of thread count.

use num_complex::Complex64;

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Component-wise Neumaier sum of complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<NeumaierSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let mut v = vec![1.0e16];
        v.extend(std::iter::repeat_n(1.0, 1000));
        v.push(-1.0e16);
        let naive: f64 = v.iter().sum();
        assert_ne!(naive, 1000.0);
        assert_eq!(compensated_sum(&v), 1000.0);
    }

    #[test]
    fn complex_components_independent() {
        let mut s = ComplexSum::new();
        for k in 0..10 {
            s.add(Complex64::new(0.1, -(k as f64)));
        }
        let v = s.value();
        assert!((v.re - 1.0).abs() < 1e-15);
        assert_eq!(v.im, -45.0);
    }
}

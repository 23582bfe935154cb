//! Small floating-point helpers shared by the other modules.

use std::ops::AddAssign;

/// `log(exp(a) + exp(b))` computed as `max(a, b) + log1p(exp(-|a - b|))`.
///
/// Either argument may be `-inf` (the log of zero).
#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// `log Σ exp(x_i)` over a slice, shifting by the maximum first.
///
/// Returns `-inf` for an empty slice.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut acc = NeumaierSum::default();
    for &v in values {
        acc += (v - max).exp();
    }
    max + acc.value().ln()
}

/// Compensated (Kahan–Babuška–Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logaddexp_matches_direct_sum() {
        let got = logaddexp(2.0f64.ln(), 3.0f64.ln());
        assert!((got - 5.0f64.ln()).abs() < 1e-15);
        assert_eq!(logaddexp(f64::NEG_INFINITY, 1.5), 1.5);
        assert_eq!(logaddexp(1.5, f64::NEG_INFINITY), 1.5);
    }

    #[test]
    fn logaddexp_large_arguments_do_not_overflow() {
        let got = logaddexp(1000.0, 1000.0);
        assert!((got - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn logsumexp_empty_is_neg_inf() {
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        let got = logsumexp(&[0.0, 0.0, 0.0, 0.0]);
        assert!((got - 4.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut s = NeumaierSum::new();
        s += 1.0;
        for _ in 0..1_000_000 {
            s += 1e-16;
        }
        assert!((s.value() - (1.0 + 1e-10)).abs() < 1e-20);
        let naive: f64 = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 1_000_000)).sum();
        assert_eq!(naive, 1.0);
    }
}

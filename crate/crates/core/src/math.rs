//! Thin `libm` wrappers plus the log-space and compensated-summation helpers
//! shared by the bound evaluators and the estimators.

pub use libm::{ceil, exp, expm1, floor, log, log1p, pow, sqrt};

/// `log(exp(a) + exp(b))` without overflow; `-inf` acts as zero.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + log1p(exp(lo - hi))
}

/// `log(sum(exp(x)))` over a slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    let mut acc = KahanSum::default();
    for &x in xs {
        acc.add(exp(x - m));
    }
    m + log(acc.total())
}

/// `log(1 + ratio * (exp(rate * t) - 1))` for `ratio` in `[0, 1]`, `rate, t >= 0`.
///
/// This is the growth factor of the Gronwall-type closed form; it is exact for
/// small exponents and never overflows for large ones.
pub fn log_gronwall_factor(ratio: f64, rate: f64, t: f64) -> f64 {
    let x = rate * t;
    if x <= 1.0 {
        log1p(ratio * expm1(x))
    } else {
        // 1 + ratio (e^x - 1) = e^x (ratio + (1 - ratio) e^-x)
        x + log(ratio + (1.0 - ratio) * exp(-x))
    }
}

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator, accumulated in iteration order.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = KahanSum::default();
    for x in xs {
        acc.add(x);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_handles_zero_and_large() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        let v = log_add_exp(1000.0, 1000.0);
        assert!((v - (1000.0 + core::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn gronwall_factor_matches_direct_formula() {
        for &(ratio, rate, t) in &[(0.5, 1.0, 0.3), (0.75, 2.0, 1.0), (1.0, 5.0, 2.0)] {
            let direct = log(1.0 + ratio * (exp(rate * t) - 1.0));
            assert!((log_gronwall_factor(ratio, rate, t) - direct).abs() < 1e-13);
        }
        // far beyond f64 range in linear space
        let big = log_gronwall_factor(1.0, 960.0, 10.0);
        assert!((big - 9600.0).abs() < 1e-9);
    }

    #[test]
    fn kahan_beats_naive_on_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(kahan_sum(xs.iter().copied()), 2.0);
    }
}

//! Log-space arithmetic.

pub use libm::{exp, lgamma, log, log1p, sqrt};

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + log1p(exp(b - a))
    } else {
        b + log1p(exp(a - b))
    }
}

/// `ln(exp(a) - exp(b))` for `a >= b`. Returns `-inf` when the difference is zero
/// and `NaN` when `b > a`.
#[inline]
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a < b {
        return f64::NAN;
    }
    if a == b {
        return f64::NEG_INFINITY;
    }
    a + log1p(-exp(b - a))
}

/// Max-shifted log-sum-exp. Empty input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| exp(v - max)).sum();
    max + log(sum)
}

/// Metropolis–Hastings acceptance test for a log acceptance ratio.
#[inline]
pub fn accept<R: rand::Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() || log_ratio == f64::NEG_INFINITY {
        return false;
    }
    let u: f64 = rng.random();
    log(u) < log_ratio
}

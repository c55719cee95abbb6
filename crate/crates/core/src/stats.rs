//! Scalar statistics helpers: Gaussian tails and Clopper–Pearson intervals.

use statrs::function::beta::beta_reg;

use crate::error::{invalid, Result};

/// `P(|Z| > t)` for a standard normal `Z`, i.e. `2(1 − Φ(t))` for `t ≥ 0`.
pub fn gaussian_two_sided_tail(t: f64) -> f64 {
    libm::erfc(t.abs() / std::f64::consts::SQRT_2)
}

/// Exact (Clopper–Pearson) two-sided binomial confidence interval for
/// `successes` out of `trials` at the given confidence level.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    if successes > trials {
        return Err(invalid(
            "successes",
            format!("{successes} exceeds trial count {trials}"),
        ));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(
            "confidence",
            format!("must lie in (0, 1), got {confidence}"),
        ));
    }
    let alpha = 1.0 - confidence;
    let k = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        beta_quantile(alpha / 2.0, k, n - k + 1.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        beta_quantile(1.0 - alpha / 2.0, k + 1.0, n - k)
    };
    Ok((low, high))
}

// Inverse of the regularized incomplete beta function by bisection. The CDF
// is monotone on [0, 1], so bisection is robust even deep in the tails.
fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..1100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

//! Log-domain helpers. All probability math stays in log space.

/// log(exp(a) + exp(b)), stable for widely separated magnitudes.
#[inline]
pub fn log_sum_exp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log(exp(a) + exp(b) + exp(c)).
#[inline]
pub fn log_sum_exp3(a: f64, b: f64, c: f64) -> f64 {
    log_sum_exp2(log_sum_exp2(a, b), c)
}

/// log-sum-exp over a slice; NEG_INFINITY for an empty or all-impossible
/// slice.
pub fn log_sum_exp_slice(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + values.iter().map(|v| (v - hi).exp()).sum::<f64>().ln()
}

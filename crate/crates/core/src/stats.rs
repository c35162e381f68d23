//! Small numerical helpers: compensated summation, quantiles, batch means.

/// Pairwise (cascade) summation. Error grows like O(log n) instead of O(n)
/// and the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut acc = 0.0;
        for x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sum that is invariant under permutations of the input: terms are sorted
/// by `total_cmp` before the pairwise reduction, so reordering the inputs
/// returns a bit-identical result.
pub fn order_insensitive_sum(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    pairwise_sum(&sorted)
}

/// Arithmetic mean via pairwise summation. Returns NaN on empty input.
pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Population variance (divisor n) around a precomputed mean.
pub fn variance_around(xs: &[f64], mean: f64) -> f64 {
    let mut acc = 0.0;
    for x in xs {
        let d = x - mean;
        acc += d * d;
    }
    acc / xs.len() as f64
}

/// Sample standard deviation (divisor n - 1).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len();
    assert!(n >= 2, "sample_sd needs at least two values");
    let m = mean(xs);
    let mut acc = 0.0;
    for x in xs {
        let d = x - m;
        acc += d * d;
    }
    (acc / (n - 1) as f64).sqrt()
}

/// Standard error of the mean: sample sd divided by sqrt(n).
pub fn standard_error(xs: &[f64]) -> f64 {
    sample_sd(xs) / (xs.len() as f64).sqrt()
}

/// Linear-interpolation quantile (the common "type 7" rule) of unsorted data.
/// `p` must lie in [0, 1].
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&p), "quantile level must be in [0, 1]");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Median shorthand for [`quantile`] at 0.5.
pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Numerically stable ln(1 + e^x).
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Numerically stable ln(sigma(x)) = -ln(1 + e^(-x)).
pub fn log_sigmoid(x: f64) -> f64 {
    -log1p_exp(-x)
}

/// Logistic sigmoid, evaluated without overflow for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(sum(exp(xs))) with the max factored out. Returns -inf on empty input
/// or when every term is -inf.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let mut acc = 0.0;
    for x in xs {
        acc += (x - max).exp();
    }
    max + acc.ln()
}

/// Empirical autocovariance at the given lag, with divisor n.
pub fn autocovariance(xs: &[f64], mean: f64, lag: usize) -> f64 {
    let n = xs.len();
    assert!(lag < n, "lag must be smaller than the series length");
    let mut acc = 0.0;
    for t in 0..(n - lag) {
        acc += (xs[t] - mean) * (xs[t + lag] - mean);
    }
    acc / n as f64
}

/// Ranges of `n_batches` equal, non-overlapping batches covering the first
/// `n_batches * floor(len / n_batches)` items.
pub fn batch_ranges(len: usize, n_batches: usize) -> Vec<std::ops::Range<usize>> {
    assert!(n_batches >= 2, "need at least two batches");
    let width = len / n_batches;
    assert!(width >= 1, "series too short for {n_batches} batches");
    (0..n_batches).map(|b| b * width..(b + 1) * width).collect()
}

/// Monte Carlo standard error of the mean of a correlated series, by
/// non-overlapping batch means: the sd of the batch averages over sqrt(B).
pub fn batch_means_mcse(xs: &[f64], n_batches: usize) -> f64 {
    let batch_values: Vec<f64> = batch_ranges(xs.len(), n_batches)
        .into_iter()
        .map(|r| mean(&xs[r]))
        .collect();
    standard_error(&batch_values)
}

//! Batch-means estimators for autocorrelated time series.

/// Default number of batches.
pub const BATCHES: usize = 20;

/// Sample mean and batch-means standard error of `values`.
///
/// The series is cut into `min(batches, len)` contiguous batches; the error is
/// the standard deviation of the batch means over `sqrt(batches)`.
pub fn batch_mean_se(values: &[f64], batches: usize) -> (f64, f64) {
    let ones = vec![1.0; values.len()];
    ratio_batch_mean_se(values, &ones, batches)
}

/// Ratio estimator `Σ num / Σ den` with a batch-means standard error.
///
/// Batches whose denominator sums to zero do not contribute to the error.
/// Returns `(0, 0)` when the overall denominator is zero.
pub fn ratio_batch_mean_se(num: &[f64], den: &[f64], batches: usize) -> (f64, f64) {
    assert_eq!(num.len(), den.len());
    let n = num.len();
    let total_den: f64 = den.iter().sum();
    if n == 0 || total_den == 0.0 {
        return (0.0, 0.0);
    }
    let mean = num.iter().sum::<f64>() / total_den;
    let b = batches.clamp(1, n);
    let mut sums = vec![(0.0, 0.0); b];
    for i in 0..n {
        let j = i * b / n;
        sums[j].0 += num[i];
        sums[j].1 += den[i];
    }
    let ratios: Vec<f64> = sums
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|(a, d)| a / d)
        .collect();
    if ratios.len() < 2 {
        return (mean, 0.0);
    }
    let m = ratios.len() as f64;
    let centre = ratios.iter().sum::<f64>() / m;
    let var = ratios.iter().map(|r| (r - centre).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Lag-1 autocorrelation of a series, `0` for fewer than three points or zero variance.
pub fn lag1_autocorrelation(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = values
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum();
    cov / var
}

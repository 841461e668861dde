//! Small numeric helpers shared by the engines.

use num_complex::Complex64;

/// Composite Simpson rule on uniformly spaced samples. Requires an odd
/// sample count (even interval count); callers validate before calling.
pub(crate) fn simpson_uniform(dt: f64, samples: &[f64]) -> f64 {
    debug_assert!(samples.len() >= 3 && samples.len() % 2 == 1);
    let n = samples.len();
    let mut acc = samples[0] + samples[n - 1];
    for (k, v) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * dt / 3.0
}

/// Composite Simpson rule for complex samples.
pub(crate) fn simpson_uniform_complex(dt: f64, samples: &[Complex64]) -> Complex64 {
    debug_assert!(samples.len() >= 3 && samples.len() % 2 == 1);
    let n = samples.len();
    let mut acc = samples[0] + samples[n - 1];
    for (k, v) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * (dt / 3.0)
}

/// Ordinary least squares for y = intercept + slope * x.
/// Returns (intercept, slope). Caller guarantees at least two distinct x.
pub(crate) fn ols_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

//! Small statistics helpers.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Sample mean and standard error of the mean (zero for one sample).
pub fn mean_and_stderr(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, math::sqrt(var / n)))
}

/// Empirical CCDF: for each grid point `x`, the fraction of samples `> x`.
pub fn ccdf(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&x| {
            let at_or_below = sorted.partition_point(|&s| s <= x);
            (sorted.len() - at_or_below) as f64 / n
        })
        .collect())
}

/// First abscissa where the piecewise-linear curve `(x, y)` reaches `level`.
pub fn crossing(x: &[f64], y: &[f64], level: f64) -> Option<f64> {
    for i in 1..x.len().min(y.len()) {
        let (y0, y1) = (y[i - 1], y[i]);
        if (y0 - level) * (y1 - level) <= 0.0 && y0 != y1 {
            return Some(x[i - 1] + (level - y0) * (x[i] - x[i - 1]) / (y1 - y0));
        }
    }
    None
}

/// Uniform grid of `points` values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..points)
            .map(|i| if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
            .collect(),
    }
}

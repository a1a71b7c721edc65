//! Small statistics helpers: batch means and least-squares line fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum post-burn-in sample count accepted by [`batch_means`].
pub const MIN_SAMPLES: usize = 100;

/// Default number of batches.
pub const DEFAULT_BATCHES: usize = 50;

/// Mean of a correlated series with a batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// Integrated autocorrelation time in units of samples, with the
    /// convention that an uncorrelated series has `tau = 0.5`.
    pub integrated_autocorrelation_time: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0).max(1.0)
}

/// Batch-means estimate of the mean of `xs`.
///
/// The tail that does not fill a whole batch is dropped from the error
/// estimate but kept in the mean.
pub fn batch_means(xs: &[f64], n_batches: usize) -> Result<ObservableEstimate> {
    if xs.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { got: xs.len(), need: MIN_SAMPLES });
    }
    let n_batches = n_batches.clamp(2, xs.len() / 2);
    let size = xs.len() / n_batches;
    let batch: Vec<f64> = xs
        .chunks_exact(size)
        .take(n_batches)
        .map(mean)
        .collect();
    let var_b = variance(&batch);
    let var_x = variance(xs);
    let std_error = (var_b / n_batches as f64).sqrt();
    let tau = if var_x > 0.0 { size as f64 * var_b / (2.0 * var_x) } else { 0.5 };
    Ok(ObservableEstimate {
        mean: mean(xs),
        std_error,
        n_samples: xs.len(),
        integrated_autocorrelation_time: tau,
    })
}

/// Ordinary least squares `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some(LineFit { intercept, slope, r_squared, n_points: xs.len() })
}

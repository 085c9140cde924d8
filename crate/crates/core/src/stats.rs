//! Batched estimators.
//!
//! Every Monte Carlo quantity is evaluated once per batch and the batch values
//! are aggregated: the reported mean is the mean of the batch values and the
//! standard error is `std(batch values) / sqrt(B)` with the unbiased sample
//! standard deviation.

use num_complex::Complex64;
use serde::Serialize;

/// Monte Carlo mean with its batched standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub n_batches: usize,
}

impl RateEstimate {
    /// Aggregates per-batch values. `n_samples` is the total sample count the
    /// batches were computed from.
    pub fn from_batch_values(values: &[f64], n_samples: usize) -> Self {
        let b = values.len();
        if b == 0 {
            return RateEstimate { mean: 0.0, std_error: 0.0, n_samples, n_batches: 0 };
        }
        let mean = values.iter().sum::<f64>() / b as f64;
        let std_error = if b > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
            (var / b as f64).sqrt()
        } else {
            0.0
        };
        RateEstimate { mean, std_error, n_samples, n_batches: b }
    }

    /// Number of standard errors separating the estimate from `target`.
    /// Returns 0 for an exact match with zero spread and infinity for a
    /// mismatch with zero spread.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_error == 0.0 {
            if diff == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            diff / self.std_error
        }
    }

    /// True when `target` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        self.z_score(target) <= k
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RateEstimate { mean: self.mean * factor, std_error: self.std_error * factor.abs(), ..*self }
    }
}

/// Batched estimate of a complex-valued moment; real and imaginary parts are
/// aggregated independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub re: RateEstimate,
    pub im: RateEstimate,
}

impl ComplexEstimate {
    pub fn from_batch_values(values: &[Complex64], n_samples: usize) -> Self {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        ComplexEstimate {
            re: RateEstimate::from_batch_values(&re, n_samples),
            im: RateEstimate::from_batch_values(&im, n_samples),
        }
    }

    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re.mean, self.im.mean)
    }

    /// Both components within `k` standard errors of `target`.
    pub fn agrees_with(&self, target: Complex64, k: f64) -> bool {
        self.re.agrees_with(target.re, k) && self.im.agrees_with(target.im, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_aggregation() {
        let est = RateEstimate::from_batch_values(&[1.0, 2.0, 3.0, 4.0], 40);
        assert_eq!(est.mean, 2.5);
        // sample variance 5/3, se = sqrt(5/12)
        assert!((est.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(est.n_batches, 4);
        assert_eq!(est.n_samples, 40);
    }

    #[test]
    fn zero_spread_z_score() {
        let est = RateEstimate::from_batch_values(&[0.0, 0.0], 2);
        assert_eq!(est.z_score(0.0), 0.0);
        assert!(est.z_score(1e-3).is_infinite());
    }

    #[test]
    fn scaling_keeps_error_nonnegative() {
        let est = RateEstimate::from_batch_values(&[1.0, 3.0], 2).scaled(-2.0);
        assert_eq!(est.mean, -4.0);
        assert!(est.std_error > 0.0);
    }
}

//! Clauser-Horne inequality
//!
//! ```text
//! <theta1> + <phi1>  >=  <theta1 phi1> + <theta1 phi2> + <theta2 phi1> - <theta2 phi2>
//! ```
//!
//! evaluated from any source of single and coincidence rates.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::detection_rates::{
    analytic_coincidence, analytic_single, apply_efficiency, batch_coincidence, batch_single_a, batch_single_b,
    check_d, Convention, EfficiencyPair,
};
use crate::error::{Error, Result};
use crate::fock_oracle::{self, TruncatedSpace};
use crate::gaussian_modes::VacuumEnsemble;
use crate::polarization_fields::{reduce_angle, AnalyzerAngles};
use crate::stats::RateEstimate;

/// Symmetric efficiency below which maximally entangled rates cannot violate
/// the inequality: `2 (sqrt 2 - 1)`.
pub const SYMMETRIC_EFFICIENCY_THRESHOLD: f64 = 2.0 * (SQRT_2 - 1.0);

/// Efficiency threshold quoted for non-maximally entangled states (Eberhard).
/// Informational only; no non-maximal model is implemented.
pub const EBERHARD_NONMAXIMAL_THRESHOLD: f64 = 2.0 / 3.0;

/// Standard errors by which a Monte Carlo margin must lie below zero to be
/// reported as a violation.
pub const MC_VIOLATION_SIGMAS: f64 = 3.0;

/// Four analyzer angles, reduced mod pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChSetting {
    pub theta1: f64,
    pub theta2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl ChSetting {
    pub fn new(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> Self {
        ChSetting {
            theta1: reduce_angle(theta1),
            theta2: reduce_angle(theta2),
            phi1: reduce_angle(phi1),
            phi2: reduce_angle(phi2),
        }
    }

    /// Every setting rotated by a common offset.
    pub fn rotated(&self, offset: f64) -> Self {
        ChSetting::new(self.theta1 + offset, self.theta2 + offset, self.phi1 + offset, self.phi2 + offset)
    }

    /// The four coincidence settings with their signs on the right-hand side.
    fn coincidence_terms(&self) -> [(AnalyzerAngles, f64); 4] {
        [
            (AnalyzerAngles::new(self.theta1, self.phi1), 1.0),
            (AnalyzerAngles::new(self.theta1, self.phi2), 1.0),
            (AnalyzerAngles::new(self.theta2, self.phi1), 1.0),
            (AnalyzerAngles::new(self.theta2, self.phi2), -1.0),
        ]
    }
}

/// `theta1 = pi/4, phi1 = pi/8, theta2 = 0, phi2 = 3 pi/8`.
pub fn standard_setting() -> ChSetting {
    ChSetting::new(PI / 4.0, 0.0, PI / 8.0, 3.0 * PI / 8.0)
}

/// Batched standard errors of the three sides of a Monte Carlo evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChErrors {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub n_samples: usize,
    pub n_batches: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChResult {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`; negative values violate the inequality.
    pub margin: f64,
    pub violated: bool,
    pub errors: Option<ChErrors>,
}

impl ChResult {
    fn exact(lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        ChResult { lhs, rhs, margin, violated: margin < 0.0, errors: None }
    }

    /// `rhs / lhs`, undefined when the singles vanish.
    pub fn ratio(&self) -> Option<f64> {
        (self.lhs != 0.0).then(|| self.rhs / self.lhs)
    }
}

/// Anything that supplies single and coincidence rates.
pub trait RateSource {
    fn single_a(&self, theta: f64) -> Result<f64>;
    fn single_b(&self, phi: f64) -> Result<f64>;
    fn coincidence(&self, angles: AnalyzerAngles) -> Result<f64>;
}

/// Local-model prediction: singles `K/2`, coincidences `(K/2) cos^2(theta - phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedRates {
    pub k: f64,
}

impl RateSource for PredictedRates {
    fn single_a(&self, _theta: f64) -> Result<f64> {
        Ok(0.5 * self.k)
    }

    fn single_b(&self, _phi: f64) -> Result<f64> {
        Ok(0.5 * self.k)
    }

    fn coincidence(&self, angles: AnalyzerAngles) -> Result<f64> {
        let c = (angles.theta() - angles.phi()).cos();
        Ok(0.5 * self.k * c * c)
    }
}

/// Closed-form detection rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRates {
    pub d: Complex64,
    pub convention: Convention,
}

impl RateSource for AnalyticRates {
    fn single_a(&self, _theta: f64) -> Result<f64> {
        analytic_single(self.d, self.convention)
    }

    fn single_b(&self, _phi: f64) -> Result<f64> {
        analytic_single(self.d, self.convention)
    }

    fn coincidence(&self, angles: AnalyzerAngles) -> Result<f64> {
        analytic_coincidence(self.d, angles, self.convention)
    }
}

/// Hilbert-space rates from the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockRates {
    pub space: TruncatedSpace,
    pub d: Complex64,
}

impl RateSource for FockRates {
    fn single_a(&self, theta: f64) -> Result<f64> {
        Ok(fock_oracle::single_rate(&self.space, self.d, theta))
    }

    fn single_b(&self, phi: f64) -> Result<f64> {
        Ok(fock_oracle::single_rate_b(&self.space, self.d, phi))
    }

    fn coincidence(&self, angles: AnalyzerAngles) -> Result<f64> {
        Ok(fock_oracle::coincidence_rate(&self.space, self.d, angles))
    }
}

/// Wraps a source with detector efficiencies.
#[derive(Debug, Clone, PartialEq)]
pub struct WithEfficiency<R> {
    pub inner: R,
    pub eff: EfficiencyPair,
}

impl<R: RateSource> RateSource for WithEfficiency<R> {
    fn single_a(&self, theta: f64) -> Result<f64> {
        Ok(self.eff.eta_a() * self.inner.single_a(theta)?)
    }

    fn single_b(&self, phi: f64) -> Result<f64> {
        Ok(self.eff.eta_b() * self.inner.single_b(phi)?)
    }

    fn coincidence(&self, angles: AnalyzerAngles) -> Result<f64> {
        Ok(self.eff.eta_a() * self.eff.eta_b() * self.inner.coincidence(angles)?)
    }
}

pub fn ch_evaluate<R: RateSource + ?Sized>(rates: &R, setting: &ChSetting) -> Result<ChResult> {
    let lhs = rates.single_a(setting.theta1)? + rates.single_b(setting.phi1)?;
    let mut rhs = 0.0;
    for (angles, sign) in setting.coincidence_terms() {
        rhs += sign * rates.coincidence(angles)?;
    }
    Ok(ChResult::exact(lhs, rhs))
}

pub fn ch_with_efficiency<R: RateSource>(rates: &R, setting: &ChSetting, eff: EfficiencyPair) -> Result<ChResult> {
    ch_evaluate(&WithEfficiency { inner: rates, eff }, setting)
}

impl<R: RateSource + ?Sized> RateSource for &R {
    fn single_a(&self, theta: f64) -> Result<f64> {
        (**self).single_a(theta)
    }

    fn single_b(&self, phi: f64) -> Result<f64> {
        (**self).single_b(phi)
    }

    fn coincidence(&self, angles: AnalyzerAngles) -> Result<f64> {
        (**self).coincidence(angles)
    }
}

/// `eta_A + eta_B < (1 + sqrt 2) eta_A eta_B`.
pub fn efficiency_violation_possible(eff: EfficiencyPair) -> bool {
    eff.eta_a() + eff.eta_b() < (1.0 + SQRT_2) * eff.eta_a() * eff.eta_b()
}

/// Monte Carlo evaluation. All six rates use the same samples, and
/// `lhs`, `rhs` and `margin` are formed per batch before aggregation, so the
/// reported errors include the correlations between terms.
pub fn mc_ch_evaluate(
    ensemble: &VacuumEnsemble,
    d: Complex64,
    setting: &ChSetting,
    convention: Convention,
    eff: EfficiencyPair,
) -> Result<ChResult> {
    if ensemble.n_samples() == 0 {
        return Err(Error::Config("empty sample stream".into()));
    }
    check_d(d)?;
    let k = convention.factor();
    let per_batch: Vec<(f64, f64)> = ensemble
        .batches()
        .par_iter()
        .map(|batch| {
            let pa = k * batch_single_a(batch, d, setting.theta1);
            let pb = k * batch_single_b(batch, d, setting.phi1);
            let (pa, pb, _) = apply_efficiency((pa, pb), 0.0, eff);
            let rhs: f64 = setting
                .coincidence_terms()
                .iter()
                .map(|(angles, sign)| {
                    let pab = batch_coincidence(batch, d, *angles, convention);
                    sign * apply_efficiency((0.0, 0.0), pab, eff).2
                })
                .sum();
            (pa + pb, rhs)
        })
        .collect();
    let n = ensemble.n_samples();
    let lhs: Vec<f64> = per_batch.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = per_batch.iter().map(|p| p.1).collect();
    let margin: Vec<f64> = per_batch.iter().map(|p| p.0 - p.1).collect();
    let (l, r, m) = (
        RateEstimate::from_batch_values(&lhs, n),
        RateEstimate::from_batch_values(&rhs, n),
        RateEstimate::from_batch_values(&margin, n),
    );
    Ok(ChResult {
        lhs: l.mean,
        rhs: r.mean,
        margin: m.mean,
        violated: m.mean < -MC_VIOLATION_SIGMAS * m.std_error,
        errors: Some(ChErrors {
            lhs: l.std_error,
            rhs: r.std_error,
            margin: m.std_error,
            n_samples: n,
            n_batches: ensemble.n_batches(),
        }),
    })
}

//! Single and coincidence detection rates.
//!
//! Three routes are provided:
//!
//! * closed forms: singles `|D|^2`, coincidences `|D|^2 cos^2(theta - phi)`,
//!   halved in the stochastic-model normalization;
//! * exact Gaussian-moment evaluation of the phase-space detection rules,
//!   through [`crate::ww_algebra::vacuum_expectation`];
//! * batched Monte Carlo over a sampled vacuum ensemble.
//!
//! The stochastic-model coincidence rate is
//! `<I_A0 I_B1> + <I_A1 I_B0> - <I_A1><I_B0> - <I_B1><I_A0>`, evaluated per
//! batch. The intensity rule `<I_A I_B> - <I_A><I_B> - <I_A0 I_B0> + <I_A0><I_B0>`
//! is also exposed; it carries an additional
//! `(|D|^2/2 + |D|^4/4) sin^2(theta + phi)` over `|D|^2 cos^2(theta - phi)`
//! coming from `<I_A1 I_B1>`, see [`intensity_rule_coincidence_exact`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_modes::{VacuumEnsemble, VacuumSample};
use crate::polarization_fields::{alice_fields, bob_fields, side_intensities, AnalyzerAngles, FieldPolynomials};
use crate::stats::RateEstimate;
use crate::ww_algebra::vacuum_expectation;

/// Above this `|D|` the second-order closed forms are flagged as unreliable.
pub const LARGE_D_WARNING: f64 = 0.2;

/// Rate normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Matches Hilbert-space vacuum expectations.
    HilbertNormalized,
    /// The realistic detection model, half the Hilbert-space values.
    StochasticModel,
}

impl Convention {
    /// Multiplier applied to stochastic-model rates.
    pub fn factor(self) -> f64 {
        match self {
            Convention::HilbertNormalized => 2.0,
            Convention::StochasticModel => 1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Convention::HilbertNormalized => "hilbert_normalized",
            Convention::StochasticModel => "stochastic_model",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hilbert_normalized" | "hilbert" => Ok(Convention::HilbertNormalized),
            "stochastic_model" | "stochastic" => Ok(Convention::StochasticModel),
            other => Err(Error::Config(format!(
                "unknown convention '{other}' (expected hilbert_normalized or stochastic_model)"
            ))),
        }
    }
}

/// Detector efficiencies of Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPair {
    eta_a: f64,
    eta_b: f64,
}

impl EfficiencyPair {
    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        for (name, v) in [("eta_a", eta_a), ("eta_b", eta_b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(EfficiencyPair { eta_a, eta_b })
    }

    pub fn symmetric(eta: f64) -> Result<Self> {
        EfficiencyPair::new(eta, eta)
    }

    pub fn ideal() -> Self {
        EfficiencyPair { eta_a: 1.0, eta_b: 1.0 }
    }

    pub fn eta_a(&self) -> f64 {
        self.eta_a
    }

    pub fn eta_b(&self) -> f64 {
        self.eta_b
    }
}

/// Rejects `|D| >= 1`; returns whether `|D|` exceeds [`LARGE_D_WARNING`].
pub fn check_d(d: Complex64) -> Result<bool> {
    let r = d.norm();
    if !r.is_finite() || r >= 1.0 {
        return Err(Error::Domain(format!("|D| = {r} must be below 1")));
    }
    Ok(r > LARGE_D_WARNING)
}

pub fn analytic_single(d: Complex64, convention: Convention) -> Result<f64> {
    check_d(d)?;
    Ok(0.5 * convention.factor() * d.norm_sqr())
}

pub fn analytic_coincidence(d: Complex64, angles: AnalyzerAngles, convention: Convention) -> Result<f64> {
    check_d(d)?;
    let c = (angles.theta() - angles.phi()).cos();
    Ok(0.5 * convention.factor() * d.norm_sqr() * c * c)
}

/// `2<I_A> - 2<I_A0>` by exact Gaussian moments.
pub fn ww_rule_single(d: Complex64, theta: f64) -> Result<f64> {
    check_d(d)?;
    let p = FieldPolynomials::new(d, AnalyzerAngles::new(theta, 0.0));
    let [ia0, _, _, _, ia, _] = p.intensities();
    Ok(2.0 * (vacuum_expectation(&ia).re - vacuum_expectation(&ia0).re))
}

/// `|<E_A+ E_B+>|^2` by exact Gaussian moments.
pub fn ww_field_rule_coincidence(d: Complex64, angles: AnalyzerAngles) -> Result<f64> {
    check_d(d)?;
    let p = FieldPolynomials::new(d, angles);
    Ok(vacuum_expectation(&(&p.e_a() * &p.e_b())).norm_sqr())
}

/// Stochastic-model coincidence rule by exact Gaussian moments.
pub fn stochastic_rule_coincidence_exact(d: Complex64, angles: AnalyzerAngles) -> Result<f64> {
    check_d(d)?;
    let [ia0, ia1, ib0, ib1, _, _] = FieldPolynomials::new(d, angles).intensities();
    let e = |p: &crate::ww_algebra::WwPolynomial| vacuum_expectation(p).re;
    Ok(e(&(&ia0 * &ib1)) + e(&(&ia1 * &ib0)) - e(&ia1) * e(&ib0) - e(&ib1) * e(&ia0))
}

/// Intensity coincidence rule by exact Gaussian moments.
pub fn intensity_rule_coincidence_exact(d: Complex64, angles: AnalyzerAngles) -> Result<f64> {
    check_d(d)?;
    let [ia0, _, ib0, _, ia, ib] = FieldPolynomials::new(d, angles).intensities();
    let e = |p: &crate::ww_algebra::WwPolynomial| vacuum_expectation(p).re;
    Ok(e(&(&ia * &ib)) - e(&ia) * e(&ib) - e(&(&ia0 * &ib0)) + e(&ia0) * e(&ib0))
}

/// Closed form of [`intensity_rule_coincidence_exact`]:
/// `|D|^2 cos^2(theta - phi) + (|D|^2/2 + |D|^4/4) sin^2(theta + phi)`.
pub fn intensity_rule_coincidence_closed_form(d: Complex64, angles: AnalyzerAngles) -> f64 {
    let d2 = d.norm_sqr();
    let cm = (angles.theta() - angles.phi()).cos();
    let sp = (angles.theta() + angles.phi()).sin();
    d2 * cm * cm + (0.5 * d2 + 0.25 * d2 * d2) * sp * sp
}

fn require_samples(ensemble: &VacuumEnsemble) -> Result<()> {
    if ensemble.n_samples() == 0 {
        return Err(Error::Config("empty sample stream".into()));
    }
    Ok(())
}

/// Batch mean of Alice's signal intensity `I_A1 = I_A - I_A0`.
pub fn batch_single_a(batch: &[VacuumSample], d: Complex64, theta: f64) -> f64 {
    let sum: f64 = batch
        .iter()
        .map(|s| {
            let (e0, e1) = alice_fields(s, d, theta);
            side_intensities(e0, e1).1
        })
        .sum();
    sum / batch.len() as f64
}

/// Batch mean of Bob's signal intensity `I_B1`.
pub fn batch_single_b(batch: &[VacuumSample], d: Complex64, phi: f64) -> f64 {
    let sum: f64 = batch
        .iter()
        .map(|s| {
            let (e0, e1) = bob_fields(s, d, phi);
            side_intensities(e0, e1).1
        })
        .sum();
    sum / batch.len() as f64
}

/// Batch means of the intensity moments entering the coincidence rules.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoincidenceMoments {
    pub i_a0: f64,
    pub i_a1: f64,
    pub i_b0: f64,
    pub i_b1: f64,
    pub i_a0_i_b1: f64,
    pub i_a1_i_b0: f64,
    pub i_a_i_b: f64,
    pub i_a0_i_b0: f64,
}

impl CoincidenceMoments {
    pub fn from_batch(batch: &[VacuumSample], d: Complex64, angles: AnalyzerAngles) -> Self {
        let mut m = CoincidenceMoments::default();
        for s in batch {
            let (a0, a1) = alice_fields(s, d, angles.theta());
            let (b0, b1) = bob_fields(s, d, angles.phi());
            let (ia0, ia1) = side_intensities(a0, a1);
            let (ib0, ib1) = side_intensities(b0, b1);
            let ia = (a0 + a1).norm_sqr();
            let ib = (b0 + b1).norm_sqr();
            m.i_a0 += ia0;
            m.i_a1 += ia1;
            m.i_b0 += ib0;
            m.i_b1 += ib1;
            m.i_a0_i_b1 += ia0 * ib1;
            m.i_a1_i_b0 += ia1 * ib0;
            m.i_a_i_b += ia * ib;
            m.i_a0_i_b0 += ia0 * ib0;
        }
        let n = batch.len() as f64;
        for v in [
            &mut m.i_a0,
            &mut m.i_a1,
            &mut m.i_b0,
            &mut m.i_b1,
            &mut m.i_a0_i_b1,
            &mut m.i_a1_i_b0,
            &mut m.i_a_i_b,
            &mut m.i_a0_i_b0,
        ] {
            *v /= n;
        }
        m
    }

    /// Stochastic-model coincidence rate from these moments.
    pub fn stochastic_rate(&self) -> f64 {
        self.i_a0_i_b1 + self.i_a1_i_b0 - self.i_a1 * self.i_b0 - self.i_b1 * self.i_a0
    }

    /// Intensity-rule coincidence rate from these moments.
    pub fn intensity_rule_rate(&self) -> f64 {
        let ia = self.i_a0 + self.i_a1;
        let ib = self.i_b0 + self.i_b1;
        self.i_a_i_b - ia * ib - self.i_a0_i_b0 + self.i_a0 * self.i_b0
    }
}

/// Batch value of the coincidence rate in the given normalization.
pub fn batch_coincidence(batch: &[VacuumSample], d: Complex64, angles: AnalyzerAngles, convention: Convention) -> f64 {
    convention.factor() * CoincidenceMoments::from_batch(batch, d, angles).stochastic_rate()
}

/// Alice's single rate, `factor * (<I_A> - <I_A0>)`.
pub fn mc_single(ensemble: &VacuumEnsemble, d: Complex64, theta: f64, convention: Convention) -> Result<RateEstimate> {
    require_samples(ensemble)?;
    check_d(d)?;
    let k = convention.factor();
    Ok(ensemble.estimate(|b| k * batch_single_a(b, d, theta)))
}

/// Bob's single rate, `factor * (<I_B> - <I_B0>)`.
pub fn mc_single_b(ensemble: &VacuumEnsemble, d: Complex64, phi: f64, convention: Convention) -> Result<RateEstimate> {
    require_samples(ensemble)?;
    check_d(d)?;
    let k = convention.factor();
    Ok(ensemble.estimate(|b| k * batch_single_b(b, d, phi)))
}

pub fn mc_coincidence(
    ensemble: &VacuumEnsemble,
    d: Complex64,
    angles: AnalyzerAngles,
    convention: Convention,
) -> Result<RateEstimate> {
    require_samples(ensemble)?;
    check_d(d)?;
    Ok(ensemble.estimate(|b| batch_coincidence(b, d, angles, convention)))
}

/// Monte Carlo estimate of the intensity coincidence rule (Hilbert
/// normalization), see [`intensity_rule_coincidence_exact`].
pub fn mc_coincidence_intensity_rule(ensemble: &VacuumEnsemble, d: Complex64, angles: AnalyzerAngles) -> Result<RateEstimate> {
    require_samples(ensemble)?;
    check_d(d)?;
    Ok(ensemble.estimate(|b| CoincidenceMoments::from_batch(b, d, angles).intensity_rule_rate()))
}

/// `(eta_A P_A, eta_B P_B, eta_A eta_B P_AB)`.
pub fn apply_efficiency(singles: (f64, f64), coincidence: f64, eff: EfficiencyPair) -> (f64, f64, f64) {
    (eff.eta_a * singles.0, eff.eta_b * singles.1, eff.eta_a * eff.eta_b * coincidence)
}

/// Exploratory single rate with the detection positivity clamp.
///
/// The background Poynting term is replaced by the constant surrogate
/// `-zpf_floor`, and the vacuum reference is clamped the same way:
/// `<[I_A - f]_+> - <[I_A0 - f]_+>` (stochastic-model units). For `f <= 0`
/// the clamp never binds and this equals [`mc_single`]. This is not the
/// default detection model.
pub fn clamped_mc_single(ensemble: &VacuumEnsemble, d: Complex64, theta: f64, zpf_floor: f64) -> Result<RateEstimate> {
    require_samples(ensemble)?;
    check_d(d)?;
    if !zpf_floor.is_finite() {
        return Err(Error::Config("zpf_floor must be finite".into()));
    }
    if zpf_floor <= 0.0 {
        return mc_single(ensemble, d, theta, Convention::StochasticModel);
    }
    Ok(ensemble.estimate(|batch| {
        let sum: f64 = batch
            .iter()
            .map(|s| {
                let (e0, e1) = alice_fields(s, d, theta);
                let ia = (e0 + e1).norm_sqr();
                let ia0 = e0.norm_sqr();
                (ia - zpf_floor).max(0.0) - (ia0 - zpf_floor).max(0.0)
            })
            .sum();
        sum / batch.len() as f64
    }))
}

/// Exact value of [`clamped_mc_single`] at analyzer angles with `sin 2 theta = 0`.
///
/// There `E_A` and `E_A0` are circular complex Gaussians, so `I_A` and `I_A0`
/// are exponential with means `(1 + |D|^2)/2` and `1/2`, and
/// `<[I - f]_+> = mean * exp(-f / mean)` for `f >= 0`. At other angles
/// `<E_A^2> = i D sin 2 theta` is nonzero and the law does not apply; that case
/// is a precondition error unless `f <= 0`.
pub fn clamped_single_exact(d: Complex64, theta: f64, zpf_floor: f64) -> Result<f64> {
    check_d(d)?;
    let mu_a = 0.5 * (1.0 + d.norm_sqr());
    let mu_0 = 0.5;
    if zpf_floor <= 0.0 {
        return Ok(mu_a - mu_0);
    }
    if d.norm() * (2.0 * theta).sin().abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "closed-form clamped rate needs sin(2 theta) = 0 when D != 0, got theta = {theta}"
        )));
    }
    Ok(mu_a * (-zpf_floor / mu_a).exp() - mu_0 * (-zpf_floor / mu_0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_modes::{sample_vacuum, SamplerConfig};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn analytic_values() {
        let d = c(0.1, 0.0);
        assert!((analytic_single(d, Convention::HilbertNormalized).unwrap() - 0.01).abs() < 1e-15);
        assert!((analytic_single(d, Convention::StochasticModel).unwrap() - 0.005).abs() < 1e-15);
        assert_eq!(analytic_single(c(0.0, 0.0), Convention::StochasticModel).unwrap(), 0.0);
        let eq = AnalyzerAngles::new(0.3, 0.3);
        assert!((analytic_coincidence(d, eq, Convention::HilbertNormalized).unwrap() - 0.01).abs() < 1e-15);
        let orth = AnalyzerAngles::new(PI / 2.0, 0.0);
        assert!(analytic_coincidence(d, orth, Convention::StochasticModel).unwrap().abs() < 1e-15);
        let q = AnalyzerAngles::new(PI / 4.0, 0.0);
        assert!((analytic_coincidence(d, q, Convention::StochasticModel).unwrap() - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn domain_guard() {
        assert!(matches!(analytic_single(c(1.0, 0.0), Convention::StochasticModel), Err(Error::Domain(_))));
        assert!(matches!(check_d(c(0.3, 0.0)), Ok(true)));
        assert!(matches!(check_d(c(0.2, 0.0)), Ok(false)));
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("stochastic_model".parse::<Convention>().unwrap(), Convention::StochasticModel);
        assert_eq!("hilbert_normalized".parse::<Convention>().unwrap(), Convention::HilbertNormalized);
        assert!("other".parse::<Convention>().is_err());
    }

    #[test]
    fn efficiency_range() {
        assert!(EfficiencyPair::new(1.1, 0.5).is_err());
        assert!(EfficiencyPair::new(0.5, -0.1).is_err());
        let eff = EfficiencyPair::symmetric(0.8).unwrap();
        let (a, b, ab) = apply_efficiency((0.01, 0.01), 0.01, eff);
        assert!((a - 0.008).abs() < 1e-15 && (b - 0.008).abs() < 1e-15 && (ab - 0.0064).abs() < 1e-15);
        assert_eq!(apply_efficiency((0.01, 0.02), 0.03, EfficiencyPair::ideal()), (0.01, 0.02, 0.03));
        let (a, _, ab) = apply_efficiency((0.01, 0.02), 0.03, EfficiencyPair::new(0.0, 0.9).unwrap());
        assert_eq!((a, ab), (0.0, 0.0));
    }

    #[test]
    fn exact_rules() {
        let d = c(0.1, 0.05);
        for (theta, phi) in [(0.0, 0.0), (0.7, 0.2), (PI / 4.0, 3.0 * PI / 8.0)] {
            let angles = AnalyzerAngles::new(theta, phi);
            let single = ww_rule_single(d, theta).unwrap();
            assert!((single - d.norm_sqr()).abs() < 1e-15);
            let field = ww_field_rule_coincidence(d, angles).unwrap();
            let hilbert = analytic_coincidence(d, angles, Convention::HilbertNormalized).unwrap();
            assert!((field - hilbert).abs() < 1e-15);
            let stoch = stochastic_rule_coincidence_exact(d, angles).unwrap();
            let expected = analytic_coincidence(d, angles, Convention::StochasticModel).unwrap();
            assert!((stoch - expected).abs() < 1e-15);
            let intensity = intensity_rule_coincidence_exact(d, angles).unwrap();
            assert!((intensity - intensity_rule_coincidence_closed_form(d, angles)).abs() < 1e-15);
        }
    }

    #[test]
    fn intensity_rule_matches_hilbert_when_sum_angle_vanishes() {
        let d = c(0.1, 0.0);
        let angles = AnalyzerAngles::new(0.4, PI - 0.4);
        let a = intensity_rule_coincidence_exact(d, angles).unwrap();
        let b = analytic_coincidence(d, angles, Convention::HilbertNormalized).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn zero_pump_gives_exact_zero_singles() {
        let ens = sample_vacuum(&SamplerConfig::new(5, 2000, 10).unwrap()).unwrap();
        let est = mc_single(&ens, c(0.0, 0.0), 0.3, Convention::HilbertNormalized).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn clamp_limits() {
        let ens = sample_vacuum(&SamplerConfig::new(9, 20_000, 10).unwrap()).unwrap();
        let d = c(0.1, 0.0);
        let plain = mc_single(&ens, d, 0.2, Convention::StochasticModel).unwrap();
        let never = clamped_mc_single(&ens, d, 0.2, -1.0).unwrap();
        assert_eq!(plain, never);
        let always = clamped_mc_single(&ens, d, 0.2, 1e6).unwrap();
        assert_eq!(always.mean, 0.0);
        let exact = clamped_single_exact(d, 0.0, 0.5).unwrap();
        assert!(exact > 0.0 && exact < clamped_single_exact(d, 0.0, 0.0).unwrap());
        assert_eq!(clamped_single_exact(d, 0.2, -1.0).unwrap(), clamped_single_exact(d, 0.0, 0.0).unwrap());
        assert!(matches!(clamped_single_exact(d, 0.2, 0.5), Err(Error::Precondition(_))));
        assert!(clamped_single_exact(c(0.0, 0.0), 0.2, 0.5).unwrap().abs() < 1e-15);
    }
}

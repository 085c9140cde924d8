//! Parametric down-conversion mode transform.
//!
//! Inside the crystal the signal and idler amplitudes obey
//!
//! ```text
//! da_s/dt = -i w_s a_s - i A a_i* exp(-i w_p t)
//! da_i/dt = -i w_i a_i - i A a_s* exp(-i w_p t)
//! ```
//!
//! With `w_p = w_s + w_i` the rotating-frame amplitudes `b_j = a_j exp(i w_j t)`
//! satisfy `db_s/dt = -i A b_i*`, `db_i/dt = -i A b_s*`, which the RK4
//! integrator below solves without the optical-frequency oscillation. The
//! production map keeps only the second-order truncation in `C = A T`,
//! rewritten through `D = C / (1 + |C|^2 / 2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian_modes::{ModeAmplitude, VacuumSample};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `D = C / (1 + |C|^2 / 2)`.
pub fn map_c_to_d(c: Complex64) -> Complex64 {
    c / (1.0 + 0.5 * c.norm_sqr())
}

/// `a exp(-i w t)`.
pub fn free_evolve(a: ModeAmplitude, omega: f64, t: f64) -> ModeAmplitude {
    a * Complex64::from_polar(1.0, -omega * t)
}

/// Signal, idler and pump angular frequencies. The pump frequency is not
/// stored: frequency matching fixes it to `omega_s + omega_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFrequencies {
    pub omega_s: f64,
    pub omega_i: f64,
}

impl ModeFrequencies {
    pub fn omega_p(&self) -> f64 {
        self.omega_s + self.omega_i
    }
}

/// Source configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcParams {
    coupling_c: Complex64,
    derived_d: Complex64,
    pub frequencies: ModeFrequencies,
    crossing_time: f64,
}

impl SpdcParams {
    /// Builds parameters from the pump coupling `C = A T`.
    pub fn from_coupling(c: Complex64, frequencies: ModeFrequencies, crossing_time: f64) -> Result<Self> {
        if !(crossing_time >= 0.0 && crossing_time.is_finite()) {
            return Err(Error::Config(format!("crossing time must be finite and >= 0, got {crossing_time}")));
        }
        if !c.is_finite() {
            return Err(Error::Config("coupling must be finite".into()));
        }
        let d = map_c_to_d(c);
        if d.norm() >= 1.0 {
            return Err(Error::Domain(format!("|D| = {} is not below 1", d.norm())));
        }
        Ok(SpdcParams { coupling_c: c, derived_d: d, frequencies, crossing_time })
    }

    /// Parameters specified directly by `D`; `C` is recovered by inverting the
    /// map on the branch `|C| < sqrt(2)`.
    pub fn from_d(d: Complex64) -> Result<Self> {
        let r = d.norm();
        if r.is_nan() || r >= 1.0 {
            return Err(Error::Domain(format!("|D| = {r} is not below 1")));
        }
        // r = x / (1 + x^2/2)  =>  x = (1 - sqrt(1 - 2 r^2)) / r, real for r <= 1/sqrt 2
        let c = if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else if 2.0 * r * r <= 1.0 {
            d * ((1.0 - (1.0 - 2.0 * r * r).sqrt()) / (r * r))
        } else {
            return Err(Error::Domain(format!("|D| = {r} exceeds the largest value 1/sqrt(2) reachable from C")));
        };
        Ok(SpdcParams {
            coupling_c: c,
            derived_d: d,
            frequencies: ModeFrequencies { omega_s: 0.0, omega_i: 0.0 },
            crossing_time: 0.0,
        })
    }

    pub fn coupling_c(&self) -> Complex64 {
        self.coupling_c
    }

    pub fn derived_d(&self) -> Complex64 {
        self.derived_d
    }

    pub fn crossing_time(&self) -> f64 {
        self.crossing_time
    }

    /// Pump amplitude `A = C / T`, zero for a zero crossing time.
    pub fn pump_amplitude(&self) -> Complex64 {
        if self.crossing_time == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coupling_c / self.crossing_time
        }
    }
}

/// `(a_s + D a_i*, a_i + D a_s*)`, global amplitude factor and spacetime
/// phases omitted.
pub fn spdc_transform(sample: &VacuumSample, d: Complex64) -> VacuumSample {
    VacuumSample { a_s: sample.a_s + d * sample.a_i.conj(), a_i: sample.a_i + d * sample.a_s.conj() }
}

/// Linear map `b_j(T) = alpha b_j(0) + beta b_k*(0)` of the rotating-frame
/// amplitudes, identical for signal and idler by symmetry of the equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCoefficients {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl TransferCoefficients {
    /// Second-order closed form: `alpha = 1 + |C|^2/2`, `beta = -i C`.
    pub fn closed_form(c: Complex64) -> Self {
        TransferCoefficients { alpha: Complex64::new(1.0 + 0.5 * c.norm_sqr(), 0.0), beta: -I * c }
    }

    /// Exact solution of the rotating-frame flow:
    /// `alpha = cosh|C|`, `beta = -i (C/|C|) sinh|C|`.
    pub fn exact(c: Complex64) -> Self {
        let x = c.norm();
        let beta = if x == 0.0 { Complex64::new(0.0, 0.0) } else { -I * (c / x) * x.sinh() };
        TransferCoefficients { alpha: Complex64::new(x.cosh(), 0.0), beta }
    }

    pub fn max_deviation(&self, other: &TransferCoefficients) -> f64 {
        (self.alpha - other.alpha).norm().max((self.beta - other.beta).norm())
    }
}

fn rotating_rhs(pump: Complex64, b: [Complex64; 2]) -> [Complex64; 2] {
    [-I * pump * b[1].conj(), -I * pump * b[0].conj()]
}

/// Classical fixed-step RK4 for the rotating-frame amplitudes over `[0, t]`.
pub fn integrate_rotating_frame(b0: [Complex64; 2], pump: Complex64, t: f64, n_steps: usize) -> Result<[Complex64; 2]> {
    if n_steps == 0 {
        return Err(Error::Config("n_steps must be at least 1".into()));
    }
    let h = t / n_steps as f64;
    let axpy = |y: [Complex64; 2], k: [Complex64; 2], s: f64| [y[0] + k[0] * s, y[1] + k[1] * s];
    let mut y = b0;
    for _ in 0..n_steps {
        let k1 = rotating_rhs(pump, y);
        let k2 = rotating_rhs(pump, axpy(y, k1, h / 2.0));
        let k3 = rotating_rhs(pump, axpy(y, k2, h / 2.0));
        let k4 = rotating_rhs(pump, axpy(y, k3, h));
        for j in 0..2 {
            y[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
    }
    Ok(y)
}

/// Integrates the lab-frame coupled equations over the crossing time and
/// returns the amplitudes at `t = T`, including the free phase `exp(-i w_j T)`.
pub fn integrate_coupled_odes(
    sample: &VacuumSample,
    pump: Complex64,
    crossing_time: f64,
    frequencies: ModeFrequencies,
    n_steps: usize,
) -> Result<VacuumSample> {
    let b = integrate_rotating_frame([sample.a_s, sample.a_i], pump, crossing_time, n_steps)?;
    Ok(VacuumSample {
        a_s: free_evolve(b[0], frequencies.omega_s, crossing_time),
        a_i: free_evolve(b[1], frequencies.omega_i, crossing_time),
    })
}

/// Transfer coefficients recovered from two integrations with unit basis
/// inputs, after undoing the free phase of the signal mode.
pub fn integrated_coefficients(
    pump: Complex64,
    crossing_time: f64,
    frequencies: ModeFrequencies,
    n_steps: usize,
) -> Result<TransferCoefficients> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let undo = Complex64::from_polar(1.0, frequencies.omega_s * crossing_time);
    let from_signal = integrate_coupled_odes(&VacuumSample::new(one, zero), pump, crossing_time, frequencies, n_steps)?;
    let from_idler = integrate_coupled_odes(&VacuumSample::new(zero, one), pump, crossing_time, frequencies, n_steps)?;
    Ok(TransferCoefficients { alpha: from_signal.a_s * undo, beta: from_idler.a_s * undo })
}

/// Observed convergence order `log2(e(n) / e(2n))` of the integrated
/// coefficients against the exact flow.
pub fn observed_order(pump: Complex64, crossing_time: f64, n_steps: usize) -> Result<f64> {
    let freqs = ModeFrequencies { omega_s: 0.0, omega_i: 0.0 };
    let exact = TransferCoefficients::exact(pump * crossing_time);
    let coarse = integrated_coefficients(pump, crossing_time, freqs, n_steps)?.max_deviation(&exact);
    let fine = integrated_coefficients(pump, crossing_time, freqs, 2 * n_steps)?.max_deviation(&exact);
    Ok((coarse / fine).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn c_to_d_values() {
        assert_eq!(map_c_to_d(c(0.0, 0.0)), c(0.0, 0.0));
        assert!((map_c_to_d(c(0.1, 0.0)).re - 0.1 / 1.005).abs() < 1e-15);
        assert!((map_c_to_d(c(0.1, 0.0)).re - 0.0995025).abs() < 1e-7);
        let d = map_c_to_d(c(0.0, 0.1));
        assert!(d.re.abs() < 1e-16);
        assert!((d.im - 0.1 / 1.005).abs() < 1e-15);
    }

    #[test]
    fn d_round_trips_through_c() {
        let p = SpdcParams::from_d(c(0.05, -0.2)).unwrap();
        assert!((map_c_to_d(p.coupling_c()) - c(0.05, -0.2)).norm() < 1e-14);
        assert!(matches!(SpdcParams::from_d(c(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn free_evolution() {
        let a = c(0.3, -0.7);
        assert_eq!(free_evolve(a, 2.0, 0.0), a);
        assert!((free_evolve(a, 2.0, PI) - a).norm() < 1e-14);
        assert!((free_evolve(c(1.0, 0.0), 1.0, PI / 2.0) - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn transform_examples() {
        let s = VacuumSample::new(c(0.4, 0.1), c(-0.2, 0.3));
        assert_eq!(spdc_transform(&s, c(0.0, 0.0)), s);
        let t = spdc_transform(&VacuumSample::new(c(1.0, 0.0), c(0.0, 0.0)), c(0.1, 0.0));
        assert_eq!(t, VacuumSample::new(c(1.0, 0.0), c(0.1, 0.0)));
    }

    #[test]
    fn zero_steps_rejected() {
        let f = ModeFrequencies { omega_s: 1.0, omega_i: 2.0 };
        let s = VacuumSample::new(c(1.0, 0.0), c(0.0, 0.0));
        assert!(matches!(integrate_coupled_odes(&s, c(0.1, 0.0), 1.0, f, 0), Err(Error::Config(_))));
    }

    #[test]
    fn decoupled_case_is_free_evolution() {
        let f = ModeFrequencies { omega_s: 3.0, omega_i: 5.0 };
        let s = VacuumSample::new(c(0.2, -0.4), c(0.6, 0.1));
        let out = integrate_coupled_odes(&s, c(0.0, 0.0), 1.3, f, 10).unwrap();
        assert!((out.a_s - free_evolve(s.a_s, 3.0, 1.3)).norm() < 1e-10);
        assert!((out.a_i - free_evolve(s.a_i, 5.0, 1.3)).norm() < 1e-10);
    }

    #[test]
    fn integrator_tracks_exact_flow() {
        let pump = c(0.06, 0.08);
        let f = ModeFrequencies { omega_s: 40.0, omega_i: 60.0 };
        let got = integrated_coefficients(pump, 1.0, f, 10_000).unwrap();
        let exact = TransferCoefficients::exact(pump);
        assert!(got.max_deviation(&exact) < 1e-12);
        let closed = TransferCoefficients::closed_form(pump);
        let gap = got.max_deviation(&closed);
        assert!(gap < 0.1f64.powi(3));
        // dominated by the cubic term of sinh
        assert!((gap - 0.1f64.powi(3) / 6.0).abs() < 1e-5);
    }

    #[test]
    fn rotating_frame_invariant() {
        let b0 = [c(0.7, -0.2), c(0.1, 0.5)];
        let inv0 = b0[0].norm_sqr() - b0[1].norm_sqr();
        let b = integrate_rotating_frame(b0, c(0.1, -0.03), 1.0, 10_000).unwrap();
        assert!((b[0].norm_sqr() - b[1].norm_sqr() - inv0).abs() < 1e-8);
    }

    #[test]
    fn fourth_order_convergence() {
        let order = observed_order(c(0.8, 0.6), 1.0, 20).unwrap();
        assert!((order - 4.0).abs() < 0.2, "order {order}");
    }
}

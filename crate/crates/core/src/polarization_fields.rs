//! Analyzer-output fields and intensities.
//!
//! For analyzers at `theta` (Alice) and `phi` (Bob) measured from the vertical,
//! each field splits into a vacuum part (order 0 in `D`) and a signal part
//! (order 1 in `D`):
//!
//! ```text
//! E_A0 = a_s cos(theta) + i a_i sin(theta)      E_A1 = D (a_i* cos(theta) + i a_s* sin(theta))
//! E_B0 = -i a_s sin(phi) + a_i cos(phi)         E_B1 = D (-i a_i* sin(phi) + a_s* cos(phi))
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::gaussian_modes::{Mode, VacuumSample};
use crate::ww_algebra::{Ladder, OperatorSum, WwPolynomial};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Reduces an angle to `[0, pi)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    // rem_euclid can round up to exactly pi for tiny negative inputs
    if r >= PI { 0.0 } else { r }
}

/// Analyzer settings, stored reduced mod pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerAngles {
    theta: f64,
    phi: f64,
}

impl AnalyzerAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        AnalyzerAngles { theta: reduce_angle(theta), phi: reduce_angle(phi) }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSet {
    pub e_a0: Complex64,
    pub e_a1: Complex64,
    pub e_b0: Complex64,
    pub e_b1: Complex64,
}

impl FieldSet {
    pub fn e_a(&self) -> Complex64 {
        self.e_a0 + self.e_a1
    }

    pub fn e_b(&self) -> Complex64 {
        self.e_b0 + self.e_b1
    }
}

/// Per-sample intensities. `i_a1` and `i_b1` contain interference cross terms
/// and can be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensitySet {
    pub i_a0: f64,
    pub i_a1: f64,
    pub i_b0: f64,
    pub i_b1: f64,
    pub i_a: f64,
    pub i_b: f64,
}

/// Alice's fields only; they do not depend on Bob's setting.
#[inline]
pub fn alice_fields(sample: &VacuumSample, d: Complex64, theta: f64) -> (Complex64, Complex64) {
    let (s, c) = theta.sin_cos();
    let e0 = sample.a_s * c + I * sample.a_i * s;
    let e1 = d * (sample.a_i.conj() * c + I * sample.a_s.conj() * s);
    (e0, e1)
}

/// Bob's fields only.
#[inline]
pub fn bob_fields(sample: &VacuumSample, d: Complex64, phi: f64) -> (Complex64, Complex64) {
    let (s, c) = phi.sin_cos();
    let e0 = -I * sample.a_s * s + sample.a_i * c;
    let e1 = d * (-I * sample.a_i.conj() * s + sample.a_s.conj() * c);
    (e0, e1)
}

pub fn partial_fields(sample: &VacuumSample, d: Complex64, angles: AnalyzerAngles) -> FieldSet {
    let (e_a0, e_a1) = alice_fields(sample, d, angles.theta);
    let (e_b0, e_b1) = bob_fields(sample, d, angles.phi);
    FieldSet { e_a0, e_a1, e_b0, e_b1 }
}

/// `(I_0, I_1)` for one side: `I_0 = |E_0|^2`, `I_1 = 2 Re(E_1 E_0*) + |E_1|^2`.
#[inline]
pub fn side_intensities(e0: Complex64, e1: Complex64) -> (f64, f64) {
    (e0.norm_sqr(), 2.0 * (e1 * e0.conj()).re + e1.norm_sqr())
}

pub fn intensities(f: &FieldSet) -> IntensitySet {
    let (i_a0, i_a1) = side_intensities(f.e_a0, f.e_a1);
    let (i_b0, i_b1) = side_intensities(f.e_b0, f.e_b1);
    IntensitySet { i_a0, i_a1, i_b0, i_b1, i_a: f.e_a().norm_sqr(), i_b: f.e_b().norm_sqr() }
}

/// The four partial fields as c-number polynomials in the vacuum amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPolynomials {
    pub e_a0: WwPolynomial,
    pub e_a1: WwPolynomial,
    pub e_b0: WwPolynomial,
    pub e_b1: WwPolynomial,
}

impl FieldPolynomials {
    pub fn new(d: Complex64, angles: AnalyzerAngles) -> Self {
        let amp = WwPolynomial::amplitude;
        let lin = |terms: [(Mode, bool, Complex64); 2]| {
            terms.iter().fold(WwPolynomial::zero(), |acc, &(m, conj, c)| &acc + &amp(m, conj).scale(c))
        };
        let (st, ct) = angles.theta.sin_cos();
        let (sp, cp) = angles.phi.sin_cos();
        let r = |x: f64| Complex64::new(x, 0.0);
        FieldPolynomials {
            e_a0: lin([(Mode::Signal, false, r(ct)), (Mode::Idler, false, I * st)]),
            e_a1: lin([(Mode::Idler, true, d * ct), (Mode::Signal, true, d * I * st)]),
            e_b0: lin([(Mode::Signal, false, -I * sp), (Mode::Idler, false, r(cp))]),
            e_b1: lin([(Mode::Idler, true, -d * I * sp), (Mode::Signal, true, d * cp)]),
        }
    }

    pub fn e_a(&self) -> WwPolynomial {
        &self.e_a0 + &self.e_a1
    }

    pub fn e_b(&self) -> WwPolynomial {
        &self.e_b0 + &self.e_b1
    }

    /// `|p|^2` as a polynomial.
    pub fn intensity(p: &WwPolynomial) -> WwPolynomial {
        p * &p.conj()
    }

    /// `(I_A0, I_A1, I_B0, I_B1, I_A, I_B)` as polynomials.
    pub fn intensities(&self) -> [WwPolynomial; 6] {
        let side = |e0: &WwPolynomial, e1: &WwPolynomial| {
            let i0 = Self::intensity(e0);
            let i1 = &(&(e0 * &e1.conj()) + &(e1 * &e0.conj())) + &Self::intensity(e1);
            (i0, i1)
        };
        let (ia0, ia1) = side(&self.e_a0, &self.e_a1);
        let (ib0, ib1) = side(&self.e_b0, &self.e_b1);
        let ia = Self::intensity(&self.e_a());
        let ib = Self::intensity(&self.e_b());
        [ia0, ia1, ib0, ib1, ia, ib]
    }
}

/// Field operators obtained by replacing amplitudes with ladder operators:
/// the positive-frequency parts `E_A0+, E_A1+, E_B0+, E_B1+`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperatorSums {
    pub e_a0: OperatorSum,
    pub e_a1: OperatorSum,
    pub e_b0: OperatorSum,
    pub e_b1: OperatorSum,
}

impl FieldOperatorSums {
    pub fn new(d: Complex64, angles: AnalyzerAngles) -> Self {
        let (st, ct) = angles.theta.sin_cos();
        let (sp, cp) = angles.phi.sin_cos();
        let r = |x: f64| Complex64::new(x, 0.0);
        let a_s = Ladder::annihilate(Mode::Signal);
        let a_i = Ladder::annihilate(Mode::Idler);
        let ad_s = Ladder::create(Mode::Signal);
        let ad_i = Ladder::create(Mode::Idler);
        let two = |l1, c1, l2, c2| OperatorSum::ladder(l1, c1) + OperatorSum::ladder(l2, c2);
        FieldOperatorSums {
            e_a0: two(a_s, r(ct), a_i, I * st),
            e_a1: two(ad_i, d * ct, ad_s, d * I * st),
            e_b0: two(a_s, -I * sp, a_i, r(cp)),
            e_b1: two(ad_i, -d * I * sp, ad_s, d * cp),
        }
    }

    pub fn e_a(&self) -> OperatorSum {
        self.e_a0.clone() + self.e_a1.clone()
    }

    pub fn e_b(&self) -> OperatorSum {
        self.e_b0.clone() + self.e_b1.clone()
    }
}

//! Truncated two-mode number basis.
//!
//! Basis index of `|n_s, n_i>` is `n_s (cutoff + 1) + n_i`. Field operators carry
//! `D` (Heisenberg picture) and are applied to the fixed vacuum `|0, 0>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian_modes::Mode;
use crate::polarization_fields::AnalyzerAngles;
use crate::ww_algebra::{Ladder, LadderKind, OperatorSum, OperatorWord};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSpace {
    cutoff: usize,
    a_s: CMatrix,
    a_i: CMatrix,
}

impl TruncatedSpace {
    pub const DEFAULT_CUTOFF: usize = 3;

    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::Config(format!("fock cutoff must be at least 2, got {cutoff}")));
        }
        let single = single_mode_annihilator(cutoff);
        let id = CMatrix::identity(cutoff + 1, cutoff + 1);
        Ok(TruncatedSpace { cutoff, a_s: single.kronecker(&id), a_i: id.kronecker(&single) })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dimension(&self) -> usize {
        (self.cutoff + 1) * (self.cutoff + 1)
    }

    pub fn index(&self, n_s: usize, n_i: usize) -> usize {
        n_s * (self.cutoff + 1) + n_i
    }

    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dimension());
        v[0] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn annihilator(&self, mode: Mode) -> &CMatrix {
        match mode {
            Mode::Signal => &self.a_s,
            Mode::Idler => &self.a_i,
        }
    }

    pub fn ladder(&self, l: Ladder) -> CMatrix {
        let a = self.annihilator(l.mode);
        match l.kind {
            LadderKind::Annihilate => a.clone(),
            LadderKind::Create => a.adjoint(),
        }
    }

    /// Matrix of a linear combination of words.
    pub fn operator_matrix(&self, sum: &OperatorSum) -> CMatrix {
        let n = self.dimension();
        sum.words.iter().fold(CMatrix::zeros(n, n), |acc, w| {
            let m = w.factors.iter().fold(CMatrix::identity(n, n), |m, l| m * self.ladder(*l));
            acc + m * w.coefficient
        })
    }

    /// `<0| word |0>` by matrix-vector products. Words longer than
    /// `2 * cutoff` are rejected since intermediate states could leave the
    /// truncated space.
    pub fn expectation_on_vacuum(&self, word: &OperatorWord) -> Result<Complex64> {
        if word.len() > 2 * self.cutoff {
            return Err(Error::Precondition(format!(
                "word of length {} exceeds 2 * cutoff = {}",
                word.len(),
                2 * self.cutoff
            )));
        }
        let mut v = self.vacuum();
        for l in word.factors.iter().rev() {
            v = self.ladder(*l) * v;
        }
        Ok(v[0] * word.coefficient)
    }
}

fn single_mode_annihilator(cutoff: usize) -> CMatrix {
    let mut a = CMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Positive-frequency field operators at Alice and Bob, split into vacuum
/// and signal parts.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperators {
    pub e_a0: CMatrix,
    pub e_a1: CMatrix,
    pub e_b0: CMatrix,
    pub e_b1: CMatrix,
}

impl FieldOperators {
    pub fn e_a(&self) -> CMatrix {
        &self.e_a0 + &self.e_a1
    }

    pub fn e_b(&self) -> CMatrix {
        &self.e_b0 + &self.e_b1
    }
}

pub fn build_field_operators(space: &TruncatedSpace, d: Complex64, angles: AnalyzerAngles) -> FieldOperators {
    let (st, ct) = angles.theta().sin_cos();
    let (sp, cp) = angles.phi().sin_cos();
    let a_s = space.annihilator(Mode::Signal);
    let a_i = space.annihilator(Mode::Idler);
    let ad_s = a_s.adjoint();
    let ad_i = a_i.adjoint();
    let r = |x: f64| Complex64::new(x, 0.0);
    FieldOperators {
        e_a0: a_s * r(ct) + a_i * (I * st),
        e_a1: (&ad_i * r(ct) + &ad_s * (I * st)) * d,
        e_b0: a_s * (-I * sp) + a_i * r(cp),
        e_b1: (&ad_i * (-I * sp) + &ad_s * r(cp)) * d,
    }
}

/// `<0| E_A- E_A+ |0> = || E_A+ |0> ||^2`.
pub fn single_rate(space: &TruncatedSpace, d: Complex64, theta: f64) -> f64 {
    let f = build_field_operators(space, d, AnalyzerAngles::new(theta, 0.0));
    (f.e_a() * space.vacuum()).norm_squared()
}

/// Bob's single rate `|| E_B+ |0> ||^2`.
pub fn single_rate_b(space: &TruncatedSpace, d: Complex64, phi: f64) -> f64 {
    let f = build_field_operators(space, d, AnalyzerAngles::new(0.0, phi));
    (f.e_b() * space.vacuum()).norm_squared()
}

/// Symmetrized normally ordered coincidence rate
/// `1/2 || E_B+ E_A+ |0> ||^2 + 1/2 || E_A+ E_B+ |0> ||^2`.
pub fn coincidence_rate(space: &TruncatedSpace, d: Complex64, angles: AnalyzerAngles) -> f64 {
    let f = build_field_operators(space, d, angles);
    let vac = space.vacuum();
    let (ea, eb) = (f.e_a(), f.e_b());
    let ab = &eb * (&ea * &vac);
    let ba = &ea * (&eb * &vac);
    0.5 * ab.norm_squared() + 0.5 * ba.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cutoff_guard() {
        assert!(matches!(TruncatedSpace::new(1), Err(Error::Config(_))));
        assert_eq!(TruncatedSpace::new(3).unwrap().dimension(), 16);
    }

    #[test]
    fn ladder_entries() {
        let space = TruncatedSpace::new(3).unwrap();
        let ad = space.ladder(Ladder::create(Mode::Signal));
        for n in 0..3 {
            for m in 0..=3 {
                let v = ad[(space.index(n + 1, m), space.index(n, m))];
                assert!((v.re - ((n + 1) as f64).sqrt()).abs() < 1e-15 && v.im == 0.0);
            }
        }
    }

    #[test]
    fn commutator_below_cutoff() {
        let space = TruncatedSpace::new(3).unwrap();
        for mode in [Mode::Signal, Mode::Idler] {
            let a = space.annihilator(mode);
            let comm = a * a.adjoint() - a.adjoint() * a;
            for ns in 0..=3usize {
                for ni in 0..=3usize {
                    let top = match mode {
                        Mode::Signal => ns,
                        Mode::Idler => ni,
                    };
                    let k = space.index(ns, ni);
                    let expected = if top < 3 { 1.0 } else { -3.0 };
                    assert!((comm[(k, k)].re - expected).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn field_operator_structure() {
        let space = TruncatedSpace::new(3).unwrap();
        let f = build_field_operators(&space, c(0.0, 0.0), AnalyzerAngles::new(0.3, 0.1));
        assert!(f.e_a1.iter().all(|z| *z == c(0.0, 0.0)));
        let g = build_field_operators(&space, c(0.1, 0.0), AnalyzerAngles::new(0.0, 0.1));
        assert!((&g.e_a0 - space.annihilator(Mode::Signal)).norm() < 1e-15);
        // two applications of E_A- (= adjoint E_A+) only reach two quanta
        let emin = g.e_a().adjoint();
        let v = &emin * (&emin * space.vacuum());
        for ns in 0..=3 {
            for ni in 0..=3 {
                if ns + ni > 2 {
                    assert_eq!(v[space.index(ns, ni)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn rates() {
        let space = TruncatedSpace::new(3).unwrap();
        let d = c(0.1, 0.0);
        for t in [0.0, 0.4, 1.3, 2.9] {
            assert!((single_rate(&space, d, t) - 0.01).abs() < 1e-14);
            assert!((single_rate_b(&space, d, t) - 0.01).abs() < 1e-14);
        }
        assert_eq!(single_rate(&space, c(0.0, 0.0), 0.7), 0.0);
        // the quartic remainder reaches 2|D|^4 exactly at orthogonal settings
        let bound = 2e-4 * (1.0 + 1e-12);
        let eq = coincidence_rate(&space, d, AnalyzerAngles::new(0.5, 0.5));
        assert!((eq - 0.01).abs() <= bound);
        let orth = coincidence_rate(&space, d, AnalyzerAngles::new(PI / 2.0, 0.0));
        assert!(orth.abs() <= bound, "orth {orth}");
    }

    #[test]
    fn vacuum_expectations() {
        let space = TruncatedSpace::new(3).unwrap();
        let a = Ladder::annihilate(Mode::Signal);
        let ad = Ladder::create(Mode::Signal);
        let b = Ladder::annihilate(Mode::Idler);
        let bd = Ladder::create(Mode::Idler);
        let e = |w: Vec<Ladder>| space.expectation_on_vacuum(&OperatorWord::new(w)).unwrap();
        assert!((e(vec![a, ad]) - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(e(vec![ad, a]), c(0.0, 0.0));
        assert!((e(vec![a, b, ad, bd]) - c(1.0, 0.0)).norm() < 1e-15);
        let small = TruncatedSpace::new(2).unwrap();
        let long = OperatorWord::new(vec![a; 6]);
        assert!(matches!(small.expectation_on_vacuum(&long), Err(Error::Precondition(_))));
    }
}

//! Weyl-symbol algebra for two bosonic modes.
//!
//! Operator words are mapped to polynomials in the c-number amplitudes
//! `a_s, a_s*, a_i, a_i*` by appending one ladder factor at a time:
//!
//! ```text
//! symbol(W a_j)  = symbol(W) a_j  - 1/2 d symbol(W) / d a_j*
//! symbol(W a_j+) = symbol(W) a_j* + 1/2 d symbol(W) / d a_j
//! ```
//!
//! Vacuum expectations of symbols use the Gaussian moments of the vacuum Wigner
//! function, `<a^n (a*)^m> = delta_nm n! / 2^n`, factorized across modes. The
//! same moment rule evaluates averages of any c-number polynomial in the
//! vacuum amplitudes, which makes this module the Wick oracle for the sampled
//! intensities as well.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::gaussian_modes::{exact_vacuum_moment, Mode, VacuumSample};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// One creation or annihilation factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub mode: Mode,
    pub kind: LadderKind,
}

impl Ladder {
    pub const fn create(mode: Mode) -> Self {
        Ladder { mode, kind: LadderKind::Create }
    }

    pub const fn annihilate(mode: Mode) -> Self {
        Ladder { mode, kind: LadderKind::Annihilate }
    }

    pub fn adjoint(self) -> Self {
        let kind = match self.kind {
            LadderKind::Create => LadderKind::Annihilate,
            LadderKind::Annihilate => LadderKind::Create,
        };
        Ladder { kind, ..self }
    }

    /// All four ladder factors of the two-mode system.
    pub const ALL: [Ladder; 4] = [
        Ladder::annihilate(Mode::Signal),
        Ladder::create(Mode::Signal),
        Ladder::annihilate(Mode::Idler),
        Ladder::create(Mode::Idler),
    ];
}

/// Ordered product of ladder operators times a coefficient. Factors act
/// right-to-left on a state, i.e. the word is read as written.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorWord {
    pub factors: Vec<Ladder>,
    pub coefficient: Complex64,
}

impl OperatorWord {
    pub fn identity() -> Self {
        OperatorWord { factors: Vec::new(), coefficient: ONE }
    }

    pub fn new(factors: Vec<Ladder>) -> Self {
        OperatorWord { factors, coefficient: ONE }
    }

    pub fn with_coefficient(mut self, c: Complex64) -> Self {
        self.coefficient = c;
        self
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Hermitian adjoint: reversed factor order, each factor adjointed,
    /// coefficient conjugated.
    pub fn adjoint(&self) -> Self {
        OperatorWord {
            factors: self.factors.iter().rev().map(|l| l.adjoint()).collect(),
            coefficient: self.coefficient.conj(),
        }
    }

    /// All coefficient-one words of exactly `len` factors over the four ladder
    /// operators, in a fixed enumeration order.
    pub fn enumerate(len: usize) -> Vec<OperatorWord> {
        let mut words = vec![Vec::new()];
        for _ in 0..len {
            words = words
                .into_iter()
                .flat_map(|w: Vec<Ladder>| {
                    Ladder::ALL.iter().map(move |&l| {
                        let mut next = w.clone();
                        next.push(l);
                        next
                    })
                })
                .collect();
        }
        words.into_iter().map(OperatorWord::new).collect()
    }
}

/// Linear combination of operator words.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorSum {
    pub words: Vec<OperatorWord>,
}

impl OperatorSum {
    pub fn zero() -> Self {
        OperatorSum::default()
    }

    pub fn ladder(l: Ladder, c: Complex64) -> Self {
        OperatorSum { words: vec![OperatorWord::new(vec![l]).with_coefficient(c)] }
    }

    pub fn adjoint(&self) -> Self {
        OperatorSum { words: self.words.iter().map(OperatorWord::adjoint).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        OperatorSum {
            words: self
                .words
                .iter()
                .map(|w| OperatorWord { coefficient: w.coefficient * c, ..w.clone() })
                .collect(),
        }
    }

    pub fn max_len(&self) -> usize {
        self.words.iter().map(OperatorWord::len).max().unwrap_or(0)
    }
}

impl From<OperatorWord> for OperatorSum {
    fn from(w: OperatorWord) -> Self {
        OperatorSum { words: vec![w] }
    }
}

impl Add for OperatorSum {
    type Output = OperatorSum;
    fn add(mut self, rhs: OperatorSum) -> OperatorSum {
        self.words.extend(rhs.words);
        self
    }
}

impl Mul for &OperatorSum {
    type Output = OperatorSum;
    fn mul(self, rhs: &OperatorSum) -> OperatorSum {
        let mut words = Vec::with_capacity(self.words.len() * rhs.words.len());
        for l in &self.words {
            for r in &rhs.words {
                let mut factors = l.factors.clone();
                factors.extend_from_slice(&r.factors);
                words.push(OperatorWord { factors, coefficient: l.coefficient * r.coefficient });
            }
        }
        OperatorSum { words }
    }
}

/// Exponents `(n_s, m_s, n_i, m_i)` of `a_s^n_s (a_s*)^m_s a_i^n_i (a_i*)^m_i`.
pub type Exponents = [u32; 4];

fn slot(mode: Mode, conjugate: bool) -> usize {
    let base = match mode {
        Mode::Signal => 0,
        Mode::Idler => 2,
    };
    base + usize::from(conjugate)
}

/// Polynomial in the two mode amplitudes and their conjugates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WwPolynomial {
    terms: BTreeMap<Exponents, Complex64>,
}

impl WwPolynomial {
    pub fn zero() -> Self {
        WwPolynomial::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = WwPolynomial::zero();
        p.add_term([0; 4], c);
        p
    }

    pub fn one() -> Self {
        WwPolynomial::constant(ONE)
    }

    /// The amplitude `a_j` or, with `conjugate`, `a_j*`.
    pub fn amplitude(mode: Mode, conjugate: bool) -> Self {
        let mut e = [0; 4];
        e[slot(mode, conjugate)] = 1;
        let mut p = WwPolynomial::zero();
        p.add_term(e, ONE);
        p
    }

    /// Polynomial with the given terms; zero coefficients are dropped and
    /// repeated exponents are summed.
    pub fn from_terms<I: IntoIterator<Item = (Exponents, Complex64)>>(terms: I) -> Self {
        let mut p = WwPolynomial::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponents, c: Complex64) {
        if c == ZERO {
            return;
        }
        let entry = self.terms.entry(e).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: Exponents) -> Complex64 {
        self.terms.get(&e).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        WwPolynomial::from_terms(self.terms.iter().map(|(e, v)| (*e, v * c)))
    }

    /// Complex conjugate: swaps each amplitude with its conjugate.
    pub fn conj(&self) -> Self {
        WwPolynomial::from_terms(self.terms.iter().map(|(e, v)| ([e[1], e[0], e[3], e[2]], v.conj())))
    }

    /// Formal Wirtinger derivative with respect to `a_j` (or `a_j*`).
    pub fn derivative(&self, mode: Mode, conjugate: bool) -> Self {
        let k = slot(mode, conjugate);
        WwPolynomial::from_terms(self.terms.iter().filter(|(e, _)| e[k] > 0).map(|(e, v)| {
            let mut d = *e;
            d[k] -= 1;
            (d, v * e[k] as f64)
        }))
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_deviation(&self, other: &WwPolynomial) -> f64 {
        (self - other).terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops terms whose modulus is at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        WwPolynomial { terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(e, c)| (*e, *c)).collect() }
    }

    /// Value at a concrete pair of amplitudes.
    pub fn evaluate(&self, sample: &VacuumSample) -> Complex64 {
        let (s, i) = (sample.a_s, sample.a_i);
        self.terms
            .iter()
            .map(|(e, c)| c * s.powu(e[0]) * s.conj().powu(e[1]) * i.powu(e[2]) * i.conj().powu(e[3]))
            .sum()
    }
}

impl Add for &WwPolynomial {
    type Output = WwPolynomial;
    fn add(self, rhs: &WwPolynomial) -> WwPolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Sub for &WwPolynomial {
    type Output = WwPolynomial;
    fn sub(self, rhs: &WwPolynomial) -> WwPolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Neg for &WwPolynomial {
    type Output = WwPolynomial;
    fn neg(self) -> WwPolynomial {
        self.scale(-ONE)
    }
}

impl Mul for &WwPolynomial {
    type Output = WwPolynomial;
    fn mul(self, rhs: &WwPolynomial) -> WwPolynomial {
        let mut out = WwPolynomial::zero();
        for (el, cl) in &self.terms {
            for (er, cr) in &rhs.terms {
                let e = [el[0] + er[0], el[1] + er[1], el[2] + er[2], el[3] + er[3]];
                out.add_term(e, cl * cr);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for WwPolynomial {
            type Output = WwPolynomial;
            fn $m(self, rhs: WwPolynomial) -> WwPolynomial {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

/// Canonical rendering: one term per line in lexicographic exponent order,
/// `(n_s, m_s, n_i, m_i): re im` with 12 significant digits. The zero
/// polynomial renders as `0`.
impl fmt::Display for WwPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for (e, c) in &self.terms {
            writeln!(f, "({}, {}, {}, {}): {:.11e} {:.11e}", e[0], e[1], e[2], e[3], c.re, c.im)?;
        }
        Ok(())
    }
}

/// Weyl symbol of an operator word.
pub fn weyl_symbol(word: &OperatorWord) -> WwPolynomial {
    let mut p = WwPolynomial::one();
    for l in &word.factors {
        p = append_factor(&p, *l);
    }
    p.scale(word.coefficient)
}

fn append_factor(p: &WwPolynomial, l: Ladder) -> WwPolynomial {
    let half = Complex64::new(0.5, 0.0);
    match l.kind {
        LadderKind::Annihilate => {
            let prod = p * &WwPolynomial::amplitude(l.mode, false);
            &prod - &p.derivative(l.mode, true).scale(half)
        }
        LadderKind::Create => {
            let prod = p * &WwPolynomial::amplitude(l.mode, true);
            &prod + &p.derivative(l.mode, false).scale(half)
        }
    }
}

/// Weyl symbol of a linear combination of words.
pub fn weyl_symbol_sum(sum: &OperatorSum) -> WwPolynomial {
    sum.words.iter().fold(WwPolynomial::zero(), |acc, w| &acc + &weyl_symbol(w))
}

/// Average of a polynomial over the vacuum Wigner distribution.
pub fn vacuum_expectation(p: &WwPolynomial) -> Complex64 {
    p.terms
        .iter()
        .map(|(e, c)| c * exact_vacuum_moment(e[0], e[1]) * exact_vacuum_moment(e[2], e[3]))
        .sum()
}

/// `<0| word |0>` through the Weyl symbol.
pub fn operator_vacuum_expectation(word: &OperatorWord) -> Complex64 {
    vacuum_expectation(&weyl_symbol(word))
}

pub fn operator_sum_vacuum_expectation(sum: &OperatorSum) -> Complex64 {
    vacuum_expectation(&weyl_symbol_sum(sum))
}

/// Single-mode ordering correspondences, as (operator word, symbol) pairs for
/// the given mode: the eight reference entries for products of up to four
/// ladder factors.
pub fn ordering_table(mode: Mode) -> Vec<(&'static str, OperatorWord, WwPolynomial)> {
    let a = Ladder::annihilate(mode);
    let ad = Ladder::create(mode);
    let abs2 = &WwPolynomial::amplitude(mode, false) * &WwPolynomial::amplitude(mode, true);
    let abs4 = &abs2 * &abs2;
    let c = |x: f64| WwPolynomial::constant(Complex64::new(x, 0.0));
    let am = WwPolynomial::amplitude(mode, false);
    let amc = WwPolynomial::amplitude(mode, true);
    vec![
        ("a+ a", OperatorWord::new(vec![ad, a]), &abs2 - &c(0.5)),
        ("a a+", OperatorWord::new(vec![a, ad]), &abs2 + &c(0.5)),
        ("a a", OperatorWord::new(vec![a, a]), &am * &am),
        ("a+ a+", OperatorWord::new(vec![ad, ad]), &amc * &amc),
        ("a+ a a+ a", OperatorWord::new(vec![ad, a, ad, a]), &abs4 - &abs2),
        ("a a+ a a+", OperatorWord::new(vec![a, ad, a, ad]), &abs4 + &abs2),
        ("a+ a+ a a", OperatorWord::new(vec![ad, ad, a, a]), &(&abs4 - &abs2.scale(Complex64::new(2.0, 0.0))) + &c(0.5)),
        ("a a a+ a+", OperatorWord::new(vec![a, a, ad, ad]), &(&abs4 + &abs2.scale(Complex64::new(2.0, 0.0))) + &c(0.5)),
    ]
}

//! C interface to the `wwspdc` simulation library.
//!
//! Every fallible call returns a [`WwStatus`] and writes results through out
//! pointers. On failure a message is kept per thread and can be read with
//! [`wwspdc_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use wwspdc::bell_analysis::{ch_with_efficiency, efficiency_violation_possible, mc_ch_evaluate, standard_setting, AnalyticRates, ChResult};
use wwspdc::detection_rates::{analytic_coincidence, analytic_single, mc_coincidence, mc_single, mc_single_b, Convention, EfficiencyPair};
use wwspdc::gaussian_modes::{sample_vacuum, SamplerConfig, VacuumEnsemble};
use wwspdc::polarization_fields::AnalyzerAngles;
use wwspdc::spdc_evolution::map_c_to_d;
use wwspdc::ww_algebra::{operator_vacuum_expectation, Ladder, OperatorWord};
use wwspdc::{Error, RateEstimate};

/// Coincidence normalization `<E_A^- E_B^- E_B^+ E_A^+>`.
pub const WWSPDC_CONVENTION_HILBERT: u32 = 0;
/// Coincidence normalization of the stochastic detection model (half the above).
pub const WWSPDC_CONVENTION_STOCHASTIC: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Precondition = 4,
    Panic = 5,
}

/// A sampled vacuum ensemble. Create with [`wwspdc_ensemble_new`], release
/// with [`wwspdc_ensemble_free`].
pub struct WwEnsemble {
    inner: VacuumEnsemble,
}

/// Batched Monte Carlo estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WwRate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub n_batches: u64,
}

/// Clauser-Horne evaluation at the standard angles. `margin_err` is zero for
/// closed-form results.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WwChResult {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub margin_err: f64,
    pub violated: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WwStatus {
    match e {
        Error::Config(_) => WwStatus::InvalidArgument,
        Error::Domain(_) => WwStatus::Domain,
        Error::Precondition(_) => WwStatus::Precondition,
    }
}

fn guard(f: impl FnOnce() -> Result<(), WwStatus>) -> WwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            WwStatus::Panic
        }
    }
}

fn lift<T>(r: wwspdc::Result<T>) -> Result<T, WwStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn invalid(msg: &str) -> WwStatus {
    set_error(msg.into());
    WwStatus::InvalidArgument
}

fn convention(code: u32) -> Result<Convention, WwStatus> {
    match code {
        WWSPDC_CONVENTION_HILBERT => Ok(Convention::HilbertNormalized),
        WWSPDC_CONVENTION_STOCHASTIC => Ok(Convention::StochasticModel),
        _ => Err(invalid("unknown convention code")),
    }
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, WwStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output pointer".into());
        WwStatus::NullPointer
    })
}

unsafe fn ensemble_ref<'a>(p: *const WwEnsemble) -> Result<&'a VacuumEnsemble, WwStatus> {
    p.as_ref().map(|e| &e.inner).ok_or_else(|| {
        set_error("null ensemble handle".into());
        WwStatus::NullPointer
    })
}

fn to_rate(r: RateEstimate) -> WwRate {
    WwRate { mean: r.mean, std_error: r.std_error, n_samples: r.n_samples as u64, n_batches: r.n_batches as u64 }
}

fn to_ch(r: ChResult) -> WwChResult {
    WwChResult {
        lhs: r.lhs,
        rhs: r.rhs,
        margin: r.margin,
        margin_err: r.errors.map(|e| e.margin).unwrap_or(0.0),
        violated: r.violated,
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wwspdc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Identifier of the random stream construction, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wwspdc_rng_id() -> *const c_char {
    static ID: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    ID.get_or_init(|| CString::new(wwspdc::gaussian_modes::RNG_ID).expect("no nul")).as_ptr()
}

/// Message of the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wwspdc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Samples `n_samples` vacuum amplitude pairs in `n_batches` batches.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_ensemble_new(
    seed: u64,
    n_samples: usize,
    n_batches: usize,
    out: *mut *mut WwEnsemble,
) -> WwStatus {
    guard(|| {
        let out = out_ref(out)?;
        let inner = lift(sample_vacuum(&SamplerConfig { seed, n_samples, n_batches }))?;
        *out = Box::into_raw(Box::new(WwEnsemble { inner }));
        Ok(())
    })
}

/// Releases an ensemble. Null is ignored.
///
/// # Safety
/// `ensemble` must come from [`wwspdc_ensemble_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_ensemble_free(ensemble: *mut WwEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// # Safety
/// `ensemble` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_ensemble_len(ensemble: *const WwEnsemble) -> usize {
    ensemble.as_ref().map_or(0, |e| e.inner.n_samples())
}

/// Monte Carlo single rate at Alice (`bob == false`) or Bob.
///
/// # Safety
/// `ensemble` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_mc_single(
    ensemble: *const WwEnsemble,
    d_re: f64,
    d_im: f64,
    angle: f64,
    bob: bool,
    convention_code: u32,
    out: *mut WwRate,
) -> WwStatus {
    guard(|| {
        let ens = ensemble_ref(ensemble)?;
        let out = out_ref(out)?;
        let conv = convention(convention_code)?;
        let d = Complex64::new(d_re, d_im);
        let r = if bob { mc_single_b(ens, d, angle, conv) } else { mc_single(ens, d, angle, conv) };
        *out = to_rate(lift(r)?);
        Ok(())
    })
}

/// Monte Carlo coincidence rate.
///
/// # Safety
/// `ensemble` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_mc_coincidence(
    ensemble: *const WwEnsemble,
    d_re: f64,
    d_im: f64,
    theta: f64,
    phi: f64,
    convention_code: u32,
    out: *mut WwRate,
) -> WwStatus {
    guard(|| {
        let ens = ensemble_ref(ensemble)?;
        let out = out_ref(out)?;
        let conv = convention(convention_code)?;
        let r = mc_coincidence(ens, Complex64::new(d_re, d_im), AnalyzerAngles::new(theta, phi), conv);
        *out = to_rate(lift(r)?);
        Ok(())
    })
}

/// Closed-form single rate.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_analytic_single(d_re: f64, d_im: f64, convention_code: u32, out: *mut f64) -> WwStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = lift(analytic_single(Complex64::new(d_re, d_im), convention(convention_code)?))?;
        Ok(())
    })
}

/// Closed-form coincidence rate.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_analytic_coincidence(
    d_re: f64,
    d_im: f64,
    theta: f64,
    phi: f64,
    convention_code: u32,
    out: *mut f64,
) -> WwStatus {
    guard(|| {
        let out = out_ref(out)?;
        let conv = convention(convention_code)?;
        *out = lift(analytic_coincidence(Complex64::new(d_re, d_im), AnalyzerAngles::new(theta, phi), conv))?;
        Ok(())
    })
}

/// `D = C / (1 + |C|^2 / 2)`.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_map_c_to_d(c_re: f64, c_im: f64, out_re: *mut f64, out_im: *mut f64) -> WwStatus {
    guard(|| {
        let (re, im) = (out_ref(out_re)?, out_ref(out_im)?);
        if !(c_re.is_finite() && c_im.is_finite()) {
            return Err(invalid("C must be finite"));
        }
        let d = map_c_to_d(Complex64::new(c_re, c_im));
        (*re, *im) = (d.re, d.im);
        Ok(())
    })
}

/// Vacuum expectation of an operator word, computed from its symmetric
/// phase-space symbol. Letters, left to right: 0 = a_s, 1 = a_s^+,
/// 2 = a_i, 3 = a_i^+.
///
/// # Safety
/// `letters` must point to `len` readable bytes (may be null when `len == 0`);
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_word_vacuum_expectation(
    letters: *const u8,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> WwStatus {
    guard(|| {
        let (re, im) = (out_ref(out_re)?, out_ref(out_im)?);
        let letters: &[u8] = if len == 0 {
            &[]
        } else if letters.is_null() {
            set_error("null word".into());
            return Err(WwStatus::NullPointer);
        } else {
            std::slice::from_raw_parts(letters, len)
        };
        let factors = letters
            .iter()
            .map(|&l| Ladder::ALL.get(l as usize).copied().ok_or_else(|| invalid("word letter out of range 0..4")))
            .collect::<Result<Vec<_>, _>>()?;
        let v = operator_vacuum_expectation(&OperatorWord::new(factors));
        (*re, *im) = (v.re, v.im);
        Ok(())
    })
}

/// Whether detector efficiencies admit a Clauser-Horne violation.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_efficiency_violation_possible(eta_a: f64, eta_b: f64, out: *mut bool) -> WwStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = efficiency_violation_possible(lift(EfficiencyPair::new(eta_a, eta_b))?);
        Ok(())
    })
}

/// Closed-form Clauser-Horne test at the standard angles.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_ch_analytic(
    d_re: f64,
    d_im: f64,
    convention_code: u32,
    eta_a: f64,
    eta_b: f64,
    out: *mut WwChResult,
) -> WwStatus {
    guard(|| {
        let out = out_ref(out)?;
        let rates = AnalyticRates { d: Complex64::new(d_re, d_im), convention: convention(convention_code)? };
        let eff = lift(EfficiencyPair::new(eta_a, eta_b))?;
        *out = to_ch(lift(ch_with_efficiency(&rates, &standard_setting(), eff))?);
        Ok(())
    })
}

/// Monte Carlo Clauser-Horne test at the standard angles; `violated` means the
/// margin lies more than three standard errors below zero.
///
/// # Safety
/// `ensemble` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wwspdc_ch_mc(
    ensemble: *const WwEnsemble,
    d_re: f64,
    d_im: f64,
    convention_code: u32,
    eta_a: f64,
    eta_b: f64,
    out: *mut WwChResult,
) -> WwStatus {
    guard(|| {
        let ens = ensemble_ref(ensemble)?;
        let out = out_ref(out)?;
        let conv = convention(convention_code)?;
        let eff = lift(EfficiencyPair::new(eta_a, eta_b))?;
        *out = to_ch(lift(mc_ch_evaluate(ens, Complex64::new(d_re, d_im), &standard_setting(), conv, eff))?);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn status_codes_are_stable() {
        assert_eq!(WwStatus::Ok as i32, 0);
        assert_eq!(WwStatus::NullPointer as i32, 1);
        assert_eq!(WwStatus::Panic as i32, 5);
    }

    #[test]
    fn static_strings() {
        let v = unsafe { CStr::from_ptr(wwspdc_version()) };
        assert_eq!(v.to_str().unwrap(), wwspdc::VERSION);
        let id = unsafe { CStr::from_ptr(wwspdc_rng_id()) };
        assert_eq!(id.to_str().unwrap(), wwspdc::gaussian_modes::RNG_ID);
    }
}

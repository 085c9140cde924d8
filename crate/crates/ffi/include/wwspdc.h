#ifndef WWSPDC_H
#define WWSPDC_H

#pragma once

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Coincidence normalization `<E_A^- E_B^- E_B^+ E_A^+>`.
 */
#define WWSPDC_CONVENTION_HILBERT 0

/**
 * Coincidence normalization of the stochastic detection model (half the above).
 */
#define WWSPDC_CONVENTION_STOCHASTIC 1

typedef enum WwStatus {
  WW_STATUS_OK = 0,
  WW_STATUS_NULL_POINTER = 1,
  WW_STATUS_INVALID_ARGUMENT = 2,
  WW_STATUS_DOMAIN = 3,
  WW_STATUS_PRECONDITION = 4,
  WW_STATUS_PANIC = 5,
} WwStatus;

/**
 * A sampled vacuum ensemble. Create with [`wwspdc_ensemble_new`], release
 * with [`wwspdc_ensemble_free`].
 */
typedef struct WwEnsemble WwEnsemble;

/**
 * Batched Monte Carlo estimate.
 */
typedef struct WwRate {
  double mean;
  double std_error;
  uint64_t n_samples;
  uint64_t n_batches;
} WwRate;

/**
 * Clauser-Horne evaluation at the standard angles. `margin_err` is zero for
 * closed-form results.
 */
typedef struct WwChResult {
  double lhs;
  double rhs;
  double margin;
  double margin_err;
  bool violated;
} WwChResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *wwspdc_version(void);

/**
 * Identifier of the random stream construction, a static NUL-terminated string.
 */
const char *wwspdc_rng_id(void);

/**
 * Message of the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *wwspdc_last_error(void);

/**
 * Samples `n_samples` vacuum amplitude pairs in `n_batches` batches.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum WwStatus wwspdc_ensemble_new(uint64_t seed,
                                  size_t n_samples,
                                  size_t n_batches,
                                  struct WwEnsemble **out);

/**
 * Releases an ensemble. Null is ignored.
 *
 * # Safety
 * `ensemble` must come from [`wwspdc_ensemble_new`] and not be used afterwards.
 */
void wwspdc_ensemble_free(struct WwEnsemble *ensemble);

/**
 * # Safety
 * `ensemble` must be a live handle or null.
 */
size_t wwspdc_ensemble_len(const struct WwEnsemble *ensemble);

/**
 * Monte Carlo single rate at Alice (`bob == false`) or Bob.
 *
 * # Safety
 * `ensemble` must be a live handle and `out` valid for writes.
 */
enum WwStatus wwspdc_mc_single(const struct WwEnsemble *ensemble,
                               double d_re,
                               double d_im,
                               double angle,
                               bool bob,
                               uint32_t convention_code,
                               struct WwRate *out);

/**
 * Monte Carlo coincidence rate.
 *
 * # Safety
 * `ensemble` must be a live handle and `out` valid for writes.
 */
enum WwStatus wwspdc_mc_coincidence(const struct WwEnsemble *ensemble,
                                    double d_re,
                                    double d_im,
                                    double theta,
                                    double phi,
                                    uint32_t convention_code,
                                    struct WwRate *out);

/**
 * Closed-form single rate.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum WwStatus wwspdc_analytic_single(double d_re,
                                     double d_im,
                                     uint32_t convention_code,
                                     double *out);

/**
 * Closed-form coincidence rate.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum WwStatus wwspdc_analytic_coincidence(double d_re,
                                          double d_im,
                                          double theta,
                                          double phi,
                                          uint32_t convention_code,
                                          double *out);

/**
 * `D = C / (1 + |C|^2 / 2)`.
 *
 * # Safety
 * `out_re` and `out_im` must be valid for writes.
 */
enum WwStatus wwspdc_map_c_to_d(double c_re, double c_im, double *out_re, double *out_im);

/**
 * Vacuum expectation of an operator word, computed from its symmetric
 * phase-space symbol. Letters, left to right: 0 = a_s, 1 = a_s^+,
 * 2 = a_i, 3 = a_i^+.
 *
 * # Safety
 * `letters` must point to `len` readable bytes (may be null when `len == 0`);
 * `out_re` and `out_im` must be valid for writes.
 */
enum WwStatus wwspdc_word_vacuum_expectation(const uint8_t *letters,
                                             size_t len,
                                             double *out_re,
                                             double *out_im);

/**
 * Whether detector efficiencies admit a Clauser-Horne violation.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum WwStatus wwspdc_efficiency_violation_possible(double eta_a, double eta_b, bool *out);

/**
 * Closed-form Clauser-Horne test at the standard angles.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum WwStatus wwspdc_ch_analytic(double d_re,
                                 double d_im,
                                 uint32_t convention_code,
                                 double eta_a,
                                 double eta_b,
                                 struct WwChResult *out);

/**
 * Monte Carlo Clauser-Horne test at the standard angles; `violated` means the
 * margin lies more than three standard errors below zero.
 *
 * # Safety
 * `ensemble` must be a live handle and `out` valid for writes.
 */
enum WwStatus wwspdc_ch_mc(const struct WwEnsemble *ensemble,
                           double d_re,
                           double d_im,
                           uint32_t convention_code,
                           double eta_a,
                           double eta_b,
                           struct WwChResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WWSPDC_H */

#ifndef SUBSERIES_H
#define SUBSERIES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_DOMAIN = 1,
  SS_STATUS_UNSUPPORTED = 2,
  SS_STATUS_LENGTH_MISMATCH = 3,
  SS_STATUS_FACTORIZATION = 4,
  SS_STATUS_CONFIG = 5,
  SS_STATUS_IO = 6,
  SS_STATUS_NULL_POINTER = 7,
  /**
   * The norm or integral is unbounded / divergent.
   */
  SS_STATUS_UNBOUNDED = 8,
  SS_STATUS_PANIC = 9,
} SsStatus;

/**
 * Opaque weighted pseudo-metric on the integers.
 */
typedef struct SsMetric SsMetric;

/**
 * Opaque result of a verification suite run.
 */
typedef struct SsSuite SsSuite;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none.
 * Valid until the next failing call on the same thread.
 */
const char *ss_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *ss_version(void);

/**
 * `exp(x^2) - 1`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SsStatus ss_phi(double x, double *out);

/**
 * `sqrt(ln(1 + y))`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SsStatus ss_phi_inv(double y, double *out);

/**
 * `C(alpha)` from the closed form.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SsStatus ss_constant_c(double alpha, double *out);

/**
 * `C(alpha)` by adaptive quadrature.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SsStatus ss_constant_c_quadrature(double alpha, double *out);

/**
 * Closed-form upper bound on `C(alpha)`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SsStatus ss_constant_c_upper(double alpha, double *out);

/**
 * Empirical `phi`-Orlicz norm of `len` values. Returns `UNBOUNDED` when the
 * bracket cap is hit.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be valid for a write.
 */
enum SsStatus ss_orlicz_norm(const double *values, size_t len, double tolerance, double *out);

/**
 * Empirical subgaussian standard on the default grid `+-2^k`, `k = -4..3`.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be valid for a write.
 */
enum SsStatus ss_tau_empirical(const double *values, size_t len, double *out);

/**
 * `2 exp(-t^2 / (4 A^2))`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SsStatus ss_tail_bound_nd(double t, double a, double *out);

/**
 * `2 exp(-t^2 / (2 B^2))`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SsStatus ss_tail_bound_cs(double t, double b, double *out);

/**
 * Decoupling coefficient `1 / (1 - |rho|)` of an AR(1) correlation.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum SsStatus ss_decoupling_ar1(double rho, double *out);

/**
 * Builds `d(i, j) = |U_j - U_i|^alpha` from `len` nonnegative weights.
 *
 * # Safety
 * `weights` must point to `len` readable doubles; `out` must be valid for a write.
 */
enum SsStatus ss_metric_new(const double *weights, size_t len, double alpha, struct SsMetric **out);

/**
 * # Safety
 * `metric` must be null or a handle from [`ss_metric_new`] not yet freed.
 */
void ss_metric_free(struct SsMetric *metric);

/**
 * # Safety
 * `metric` must be a live handle; `out` must be valid for a write.
 */
enum SsStatus ss_metric_eval(const struct SsMetric *metric, size_t i, size_t j, double *out);

/**
 * Minimal number of open balls of radius `epsilon` covering `{0..max_index}`.
 *
 * # Safety
 * `metric` must be a live handle; `out_count` must be valid for a write.
 */
enum SsStatus ss_metric_covering(const struct SsMetric *metric,
                                 double epsilon,
                                 size_t max_index,
                                 size_t *out_count);

/**
 * Entropy integral of `{0..max_index}`; `UNBOUNDED` when divergent.
 *
 * # Safety
 * `metric` must be a live handle; `out` must be valid for a write.
 */
enum SsStatus ss_metric_dudley(const struct SsMetric *metric, size_t max_index, double *out);

/**
 * Runs a suite. `checks_json` is a JSON array of checks, or null for the
 * built-in suite.
 *
 * # Safety
 * `checks_json` must be null or a NUL-terminated string; `out` must be valid for a write.
 */
enum SsStatus ss_suite_run(const char *checks_json, uint64_t seed, struct SsSuite **out);

/**
 * Reports as a JSON array; owned by the handle.
 *
 * # Safety
 * `suite` must be null or a live handle.
 */
const char *ss_suite_json(const struct SsSuite *suite);

/**
 * Summary table as CSV; owned by the handle.
 *
 * # Safety
 * `suite` must be null or a live handle.
 */
const char *ss_suite_csv(const struct SsSuite *suite);

/**
 * True iff no check failed. False for a null handle.
 *
 * # Safety
 * `suite` must be null or a live handle.
 */
bool ss_suite_all_passed(const struct SsSuite *suite);

/**
 * # Safety
 * `suite` must be null or a handle from [`ss_suite_run`] not yet freed.
 */
void ss_suite_free(struct SsSuite *suite);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBSERIES_H */

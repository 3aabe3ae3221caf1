#ifndef CIRCLE_LAB_H
#define CIRCLE_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CircleLabStatus {
  CIRCLE_LAB_STATUS_OK = 0,
  /**
   * A precondition on the inputs does not hold.
   */
  CIRCLE_LAB_STATUS_DOMAIN = 1,
  /**
   * A size cap would be exceeded.
   */
  CIRCLE_LAB_STATUS_CAP_EXCEEDED = 2,
  /**
   * A sample set was empty after filtering.
   */
  CIRCLE_LAB_STATUS_EMPTY_SAMPLE = 3,
  CIRCLE_LAB_STATUS_NULL_POINTER = 4,
  /**
   * The requested index is outside the handle's range, or a value does not fit.
   */
  CIRCLE_LAB_STATUS_OUT_OF_RANGE = 5,
  CIRCLE_LAB_STATUS_INTERNAL = 6,
} CircleLabStatus;

/**
 * Farey dissection into major and minor arcs.
 */
typedef struct CircleLabArcs CircleLabArcs;

/**
 * Representation counts `R(λ)` for `0 ≤ λ ≤ lambda_max`.
 */
typedef struct CircleLabRepTable CircleLabRepTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *circle_lab_version(void);

/**
 * Message for the last failed call on this thread; valid until the next
 * failing call on the same thread. Empty if nothing failed yet.
 */
const char *circle_lab_last_error(void);

/**
 * Builds `R(λ)` for `λ ≤ lambda_max`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CircleLabStatus circle_lab_rep_table_new(uint32_t k,
                                              uint32_t d,
                                              uint64_t lambda_max,
                                              struct CircleLabRepTable **out);

/**
 * `R(λ)`; `OUT_OF_RANGE` if `λ` exceeds the table or the count exceeds `u64`.
 *
 * # Safety
 * `table` must come from [`circle_lab_rep_table_new`]; `out` must be writable.
 */
enum CircleLabStatus circle_lab_rep_table_count(const struct CircleLabRepTable *table,
                                                uint64_t lambda,
                                                uint64_t *out);

/**
 * Largest `λ` stored in the table.
 *
 * # Safety
 * `table` must come from [`circle_lab_rep_table_new`]; `out` must be writable.
 */
enum CircleLabStatus circle_lab_rep_table_lambda_max(const struct CircleLabRepTable *table,
                                                     uint64_t *out);

/**
 * # Safety
 * `table` must come from [`circle_lab_rep_table_new`] and not be used afterwards.
 * Null is accepted and ignored.
 */
void circle_lab_rep_table_free(struct CircleLabRepTable *table);

/**
 * Dissection at level `n` for degree `k`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CircleLabStatus circle_lab_arcs_new(uint64_t n, uint32_t k, struct CircleLabArcs **out);

/**
 * Number of listed major arcs (both `0/1` and `1/1` included).
 *
 * # Safety
 * `arcs` must come from [`circle_lab_arcs_new`]; `out` must be writable.
 */
enum CircleLabStatus circle_lab_arcs_len(const struct CircleLabArcs *arcs, size_t *out);

/**
 * Classifies `theta`; writes `q = 0` for the minor arcs, else the arc's `a/q`.
 *
 * # Safety
 * `arcs` must come from [`circle_lab_arcs_new`]; outputs must be writable.
 */
enum CircleLabStatus circle_lab_arcs_classify(const struct CircleLabArcs *arcs,
                                              double theta,
                                              uint64_t *out_a,
                                              uint64_t *out_q);

/**
 * # Safety
 * `arcs` must come from [`circle_lab_arcs_new`] and not be used afterwards.
 * Null is accepted and ignored.
 */
void circle_lab_arcs_free(struct CircleLabArcs *arcs);

/**
 * `d0*(k) = 1 + ⌊d0(k)⌋`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CircleLabStatus circle_lab_d0_star(uint32_t k, uint32_t *out);

/**
 * Normalised Gauss sum `G(q; a, b)`.
 *
 * # Safety
 * Outputs must be writable.
 */
enum CircleLabStatus circle_lab_gauss_sum(uint64_t q,
                                          int64_t a,
                                          int64_t b,
                                          uint32_t k,
                                          double *out_re,
                                          double *out_im);

/**
 * `S_N(θ, ξ) = Σ_{|n| ≤ N} e(θ|n|^k + ξn)`.
 *
 * # Safety
 * Outputs must be writable.
 */
enum CircleLabStatus circle_lab_weyl_sum(double theta,
                                         double xi,
                                         uint64_t n,
                                         uint32_t k,
                                         double *out_re,
                                         double *out_im);

/**
 * `v_N(θ, ξ)` with the default quadrature settings.
 *
 * # Safety
 * Outputs must be writable.
 */
enum CircleLabStatus circle_lab_v_n(double theta,
                                    double xi,
                                    double n,
                                    uint32_t k,
                                    double *out_re,
                                    double *out_im);

/**
 * `d̃σ_λ(η)` for `η` of length `d`.
 *
 * # Safety
 * `eta` must point to `d` readable doubles; outputs must be writable.
 */
enum CircleLabStatus circle_lab_sigma_hat(const double *eta,
                                          uint32_t d,
                                          double lambda,
                                          uint32_t k,
                                          double *out_re,
                                          double *out_im);

/**
 * `Â_λ(ξ)` for `ξ` of length `d`.
 *
 * # Safety
 * `xi` must point to `d` readable doubles; outputs must be writable.
 */
enum CircleLabStatus circle_lab_a_hat(uint64_t lambda,
                                      const double *xi,
                                      uint32_t d,
                                      uint32_t k,
                                      double *out_re,
                                      double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRCLE_LAB_H */

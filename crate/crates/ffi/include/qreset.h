#ifndef QRESET_H
#define QRESET_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QresetConvention {
  QRESET_CONVENTION_TABLE_I = 0,
  QRESET_CONVENTION_ANGULAR_HBAR1 = 1,
} QresetConvention;

typedef enum QresetStatus {
  QRESET_STATUS_OK = 0,
  QRESET_STATUS_NULL_POINTER = 1,
  QRESET_STATUS_INVALID_INPUT = 2,
  QRESET_STATUS_MALFORMED_JSON = 3,
  QRESET_STATUS_NO_RESONANCE = 4,
  QRESET_STATUS_NO_PURIFICATION = 5,
  QRESET_STATUS_DECOMPOSITION_FAILURE = 6,
  QRESET_STATUS_SINGULAR_ANGLES = 7,
  QRESET_STATUS_BUFFER_TOO_SMALL = 8,
  QRESET_STATUS_RUNTIME = 9,
  QRESET_STATUS_PANIC = 10,
} QresetStatus;

/**
 * Sampled qubit purity.
 */
typedef struct QresetCurve QresetCurve;

/**
 * Outcome of a pulse optimization.
 */
typedef struct QresetOptimization QresetOptimization;

/**
 * System parameters and operator choices.
 */
typedef struct QresetSpec QresetSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *qreset_last_error_message(void);

void qreset_clear_last_error(void);

/**
 * Two-level ancilla with σ₁ couplings and control.
 *
 * # Safety
 * `out_spec` must be a valid pointer to writable storage.
 */
enum QresetStatus qreset_spec_two_level(double omega_s,
                                        double omega_b,
                                        double j,
                                        double beta,
                                        struct QresetSpec **out_spec);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out_spec` writable.
 */
enum QresetStatus qreset_spec_from_json(const char *json, struct QresetSpec **out_spec);

/**
 * # Safety
 * `spec` must come from a `qreset_spec_*` constructor (or be NULL).
 */
void qreset_spec_free(struct QresetSpec *spec);

/**
 * Select Pauli operators O_S, O_B, O_c (indices 1..3).
 *
 * # Safety
 * `spec` must be a live handle.
 */
enum QresetStatus qreset_spec_set_case(struct QresetSpec *spec,
                                       uint32_t o_s,
                                       uint32_t o_b,
                                       uint32_t o_c);

/**
 * Select Bloch directions from φ_S, θ_S, φ_B, θ_B, φ_c, θ_c.
 *
 * # Safety
 * `spec` must be a live handle and `angles` point to six doubles.
 */
enum QresetStatus qreset_spec_set_angles(struct QresetSpec *spec, const double *angles);

/**
 * # Safety
 * `spec` must be a live handle and `out_eps` writable.
 */
enum QresetStatus qreset_resonant_amplitude(const struct QresetSpec *spec, double *out_eps);

/**
 * π/(2η₋) for the Pauli case selected in `spec`.
 *
 * # Safety
 * `spec` must be a live handle and `out_tmin` writable.
 */
enum QresetStatus qreset_tmin(const struct QresetSpec *spec, double *out_tmin);

/**
 * Reset time of a Pauli case for device set 0, 1 or 2.
 *
 * # Safety
 * `out_time` must be writable.
 */
enum QresetStatus qreset_device_reset_time(uint32_t o_s,
                                           uint32_t o_b,
                                           uint32_t o_c,
                                           uint32_t set_index,
                                           enum QresetConvention convention,
                                           double *out_time);

/**
 * Rows of (dim L, dim k, dim p, dim a, purifiable) for the 27 Pauli cases
 * in lexicographic order; `buf` needs 135 entries.
 *
 * # Safety
 * `spec` must be a live handle and `buf` hold `len` elements.
 */
enum QresetStatus qreset_classify_all(const struct QresetSpec *spec, uint32_t *buf, size_t len);

/**
 * Purity under the constant resonant field from the thermal product
 * state, on `n_times` points of [0, t_max].
 *
 * # Safety
 * `spec` must be a live handle and `out_curve` writable.
 */
enum QresetStatus qreset_simulate_constant(const struct QresetSpec *spec,
                                           double t_max,
                                           size_t n_times,
                                           struct QresetCurve **out_curve);

/**
 * # Safety
 * `curve` must be a live handle.
 */
size_t qreset_curve_len(const struct QresetCurve *curve);

/**
 * Copy times and purities into caller buffers of length `len`.
 *
 * # Safety
 * `curve` must be a live handle; `times` and `values` hold `len` doubles.
 */
enum QresetStatus qreset_curve_copy(const struct QresetCurve *curve,
                                    double *times,
                                    double *values,
                                    size_t len);

/**
 * # Safety
 * `curve` must be a live handle; outputs writable.
 */
enum QresetStatus qreset_curve_peak(const struct QresetCurve *curve,
                                    double *out_time,
                                    double *out_value);

/**
 * # Safety
 * `curve` must come from `qreset_simulate_constant` (or be NULL).
 */
void qreset_curve_free(struct QresetCurve *curve);

/**
 * Maximum purity of a d_S-level system after any joint unitary with an
 * ancilla, from the two spectra.
 *
 * # Safety
 * `s` and `b` hold `n_s` and `n_b` doubles; `out_purity` writable.
 */
enum QresetStatus qreset_max_purity(const double *s,
                                    size_t n_s,
                                    const double *b,
                                    size_t n_b,
                                    double *out_purity);

/**
 * # Safety
 * `b` holds `n_b` doubles; outputs writable.
 */
enum QresetStatus qreset_epsilon_check(const double *b,
                                       size_t n_b,
                                       size_t d_s,
                                       double eps,
                                       bool *out_eligible,
                                       double *out_infidelity);

/**
 * Canonical Weyl coordinates of a 4×4 unitary given row-major as
 * interleaved (re, im) pairs, 32 doubles.
 *
 * # Safety
 * `u` holds 32 doubles and `out_c` room for 3.
 */
enum QresetStatus qreset_weyl_coordinates(const double *u, double *out_c);

/**
 * Brute-force minimal c₁+c₂+c₃ reaching the ancilla purity.
 *
 * # Safety
 * `out_angle` must be writable.
 */
enum QresetStatus qreset_qsl_min_total_angle(double p_e,
                                             double p_g,
                                             double gamma_re,
                                             double gamma_im,
                                             size_t grid_n,
                                             double *out_angle);

/**
 * Optimize a piecewise-constant field from the resonant guess, starting
 * in the thermal product state.
 *
 * # Safety
 * `spec` must be a live handle and `out_result` writable.
 */
enum QresetStatus qreset_optimize(const struct QresetSpec *spec,
                                  double tau,
                                  size_t n_segments,
                                  size_t max_iter,
                                  struct QresetOptimization **out_result);

/**
 * # Safety
 * `result` must be a live handle; outputs writable.
 */
enum QresetStatus qreset_optimization_purities(const struct QresetOptimization *result,
                                               double *out_guess,
                                               double *out_final);

/**
 * Copy the optimized primary amplitudes into `buf`.
 *
 * # Safety
 * `result` must be a live handle and `buf` hold `len` doubles.
 */
enum QresetStatus qreset_optimization_amplitudes(const struct QresetOptimization *result,
                                                 double *buf,
                                                 size_t len);

/**
 * # Safety
 * `result` must come from `qreset_optimize` (or be NULL).
 */
void qreset_optimization_free(struct QresetOptimization *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRESET_H */

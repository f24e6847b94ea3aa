#ifndef TDHO_H
#define TDHO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdhoStatus {
  TDHO_STATUS_OK = 0,
  TDHO_STATUS_NULL_POINTER = 1,
  TDHO_STATUS_DOMAIN = 2,
  TDHO_STATUS_CONFIG = 3,
  TDHO_STATUS_INTEGRATION = 4,
  TDHO_STATUS_IO = 5,
  TDHO_STATUS_PANIC = 6,
} TdhoStatus;

/**
 * Exact Gaussian state of a time-dependent oscillator.
 */
typedef struct TdhoSolution TdhoSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Writes the message of the last failure on this thread into `buf` (NUL
 * terminated, truncated to `len`) and returns its full length without the NUL.
 * Returns 0 when no failure has been recorded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t tdho_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tdho_version(void);

/**
 * `Ω(t) = 1/(a + bt)` with `a = √(1 - b²/4)`, `0 ≤ b < 2`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum TdhoStatus tdho_solution_subcritical(double b, struct TdhoSolution **out);

/**
 * `Ω(t) = 1/(1 + 2t)`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum TdhoStatus tdho_solution_critical(struct TdhoSolution **out);

/**
 * `Ω ≡ 1`: the stationary ground state.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum TdhoStatus tdho_solution_static(struct TdhoSolution **out);

/**
 * Numerically integrated Ermakov solution for `Ω(t) = 1/(a + bt)` on `[0, t_max]`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum TdhoStatus tdho_solution_numeric_rational(double a,
                                               double b,
                                               double rho0,
                                               double rho_dot0,
                                               double t_max,
                                               struct TdhoSolution **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `handle` must be null or come from a `tdho_solution_*` constructor and not
 * have been freed.
 */
void tdho_solution_free(struct TdhoSolution *handle);

/**
 * `ρ(t)`.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum TdhoStatus tdho_rho(const struct TdhoSolution *handle, double t, double *out);

/**
 * `ν = ln ρ` and its first two time derivatives; any output may be null.
 *
 * # Safety
 * `handle` must be a live handle; non-null outputs must be writable.
 */
enum TdhoStatus tdho_nu(const struct TdhoSolution *handle,
                        double t,
                        double *nu,
                        double *nu_dot,
                        double *nu_ddot);

/**
 * Bohm potential `V_B(x, t)`.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum TdhoStatus tdho_bohm_potential(const struct TdhoSolution *handle,
                                    double x,
                                    double t,
                                    double *out);

/**
 * Classical potential `Ω(t)² x² / 2`.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum TdhoStatus tdho_classical_potential(const struct TdhoSolution *handle,
                                         double x,
                                         double t,
                                         double *out);

/**
 * `ψ(x, t)` split into real and imaginary parts.
 *
 * # Safety
 * `handle` must be a live handle; `re` and `im` must be writable.
 */
enum TdhoStatus tdho_psi(const struct TdhoSolution *handle,
                         double x,
                         double t,
                         double *re,
                         double *im);

/**
 * `ψ(xs[i], t)` for `n` points.
 *
 * # Safety
 * `xs` must hold `n` readable values; `re` and `im` must hold `n` writable values.
 */
enum TdhoStatus tdho_psi_batch(const struct TdhoSolution *handle,
                               const double *xs,
                               size_t n,
                               double t,
                               double *re,
                               double *im);

/**
 * Propagates `ψ(x, 0)` with the split-step solver on `n` points and
 * compares with the exact state at `samples` uniform times in `[0, t_max]`.
 * A non-positive `half_width` sizes the domain automatically. Reports the
 * smallest fidelity and the largest norm error.
 *
 * # Safety
 * `handle` must be a live handle; `min_fidelity` and `max_norm_error` must be writable.
 */
enum TdhoStatus tdho_tdse_check(const struct TdhoSolution *handle,
                                double t_max,
                                double dt,
                                size_t n,
                                double half_width,
                                size_t samples,
                                double *min_fidelity,
                                double *max_norm_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TDHO_H */

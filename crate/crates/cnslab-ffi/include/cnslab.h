#ifndef CNSLAB_H
#define CNSLAB_H

/* Generated by cbindgen from crates/cnslab-ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CnsStatus {
  CNS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CNS_STATUS_NULL_POINTER = 1,
  /**
   * Bad sizes, parameters, times or other argument values.
   */
  CNS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The run manifest did not parse or named an unknown experiment.
   */
  CNS_STATUS_CONFIG = 3,
  /**
   * The time step violates the acoustic CFL bound.
   */
  CNS_STATUS_CFL = 4,
  /**
   * The density approached vacuum.
   */
  CNS_STATUS_VACUUM = 5,
  /**
   * A run stopped early (vacuum or energy blow-up).
   */
  CNS_STATUS_ABORTED = 6,
  /**
   * File system or serialization failure.
   */
  CNS_STATUS_IO = 7,
  /**
   * Any other numerical failure.
   */
  CNS_STATUS_NUMERICAL = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  CNS_STATUS_PANIC = 9,
} CnsStatus;

/**
 * Fluid parameters with the isentropic law `P(ρ) = ρ^γ/γ`.
 */
typedef struct CnsParams CnsParams;

/**
 * A state `(ρ̃, m₁, m₂)` on a periodic grid.
 */
typedef struct CnsState CnsState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cns_version(void);

/**
 * Message of the last failure on this thread, or null if there was none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *cns_last_error_message(void);

/**
 * Creates fluid parameters.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CnsStatus cns_params_new(double mu,
                              double lambda,
                              double rho_star,
                              double gamma,
                              struct CnsParams **out);

/**
 * Sound speed `c = √P′(ρ*)`.
 *
 * # Safety
 * `params` must be a live handle and `out` a valid pointer.
 */
enum CnsStatus cns_params_sound_speed(const struct CnsParams *params, double *out);

/**
 * Releases a parameter handle; null is ignored.
 *
 * # Safety
 * `params` must be null or a handle not yet freed.
 */
void cns_params_free(struct CnsParams *params);

/**
 * Builds a state from physical samples of `ρ̃`, `m₁`, `m₂`, each `n·n`
 * values.
 *
 * # Safety
 * The three arrays must hold `n·n` readable doubles and `out` must be valid.
 */
enum CnsStatus cns_state_new(size_t n,
                             double length,
                             const double *rho,
                             const double *m1,
                             const double *m2,
                             struct CnsState **out);

/**
 * Grid size and box length of a state.
 *
 * # Safety
 * `state` must be a live handle; `n` and `length` valid pointers.
 */
enum CnsStatus cns_state_grid(const struct CnsState *state, size_t *n, double *length);

/**
 * Copies the physical samples into caller buffers of `len` doubles each;
 * `len` must equal `n·n`. Any of the buffers may be null to skip it.
 *
 * # Safety
 * `state` must be a live handle; non-null buffers must hold `len` doubles.
 */
enum CnsStatus cns_state_values(const struct CnsState *state,
                                double *rho,
                                double *m1,
                                double *m2,
                                size_t len);

/**
 * Releases a state handle; null is ignored.
 *
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void cns_state_free(struct CnsState *state);

/**
 * Exact linearized evolution `S(t)⋆X₀`.
 *
 * # Safety
 * `state` and `params` must be live handles and `out` valid.
 */
enum CnsStatus cns_linear_evolution(const struct CnsState *state,
                                    const struct CnsParams *params,
                                    double t,
                                    struct CnsState **out);

/**
 * Integrates the compressible system from `state` to `t_end` and returns
 * the final state. `dt <= 0` selects the default step; `nonlinear = false`
 * keeps only the exact linear flow.
 *
 * # Safety
 * `state` and `params` must be live handles and `out` valid.
 */
enum CnsStatus cns_simulate(const struct CnsState *state,
                            const struct CnsParams *params,
                            double t_end,
                            double dt,
                            bool nonlinear,
                            struct CnsState **out);

/**
 * Number of registered experiments.
 */
size_t cns_experiment_count(void);

/**
 * Name of experiment `i` as a static string, or null when out of range.
 */
const char *cns_experiment_name(size_t i);

/**
 * Runs the experiments of a `key = value` manifest and writes its output
 * files. `all_pass` receives whether every report passed.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `all_pass` valid.
 */
enum CnsStatus cns_run(const char *config, bool *all_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CNSLAB_H */

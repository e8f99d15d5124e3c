#ifndef TURNSTILE_H
#define TURNSTILE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call. Values 1 to 4 match the command-line
 * exit codes.
 */
typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_INTERNAL = 1,
  TS_STATUS_PARSE = 2,
  TS_STATUS_VALIDATION = 3,
  TS_STATUS_IO = 4,
  TS_STATUS_NULL_POINTER = 5,
  TS_STATUS_PANIC = 6,
} TsStatus;

/**
 * Parsed and validated run configuration.
 */
typedef struct TsConfig TsConfig;

/**
 * Tomography design matrix with its decomposition.
 */
typedef struct TsDesign TsDesign;

/**
 * Summary of one measurement cycle.
 */
typedef struct TsCycleSummary {
  /**
   * Ancilla Bloch vector after the interaction.
   */
  double u_a[3];
  /**
   * Pulse probability, clamped to `[0, 1]`.
   */
  double pr_pulse;
  /**
   * Unclamped `C τ₁ |T|² (1 + u_R·u_A)`.
   */
  double pr_raw;
  /**
   * True when `2 C τ₁ |T|² > 1`.
   */
  bool saturated;
  double kappa;
  /**
   * Max-abs deviation of `E_pulse + E_none` from the identity.
   */
  double completeness_error;
  /**
   * True when the time-scale hierarchy holds.
   */
  bool hierarchy_satisfied;
} TsCycleSummary;

/**
 * Pulse counts from repeated cycles.
 */
typedef struct TsShotRecord {
  uint64_t n_cycles;
  uint64_t n_pulses;
  double pr_hat;
  double std_err;
} TsShotRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or an empty
 * string. The pointer stays valid until the next call on the same thread.
 */
const char *ts_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ts_version(void);

/**
 * Default configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum TsStatus ts_config_default(struct TsConfig **out);

/**
 * Parse and validate a JSON configuration document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TsStatus ts_config_from_json(const char *json, struct TsConfig **out);

/**
 * Override the master seed.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum TsStatus ts_config_set_seed(struct TsConfig *cfg, uint64_t seed);

/**
 * Release a configuration handle. Null is ignored.
 *
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void ts_config_free(struct TsConfig *cfg);

/**
 * Run a command (`rates`, `cycle`, `sweep`, `calibrate`, `tomography`) and
 * return its table encoded as `csv` or `jsonl`. Output is byte-identical to
 * the command-line tool for the same configuration.
 *
 * # Safety
 * `cfg` must be a live handle, `command` and `format` NUL-terminated
 * strings, and `out` a valid pointer. Free the result with
 * [`ts_string_free`].
 */
enum TsStatus ts_execute(const struct TsConfig *cfg,
                         const char *command,
                         const char *format,
                         char **out);

/**
 * Release a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void ts_string_free(char *s);

/**
 * Lorentzian tunneling rate `|T_Lc|² γ₀² / (Δ² + γ₀²)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TsStatus ts_gamma_rate(double delta, double gamma0, double t_lc_sq, double *out);

/**
 * Clamped pulse probability `C τ₁ t_sq (1 + u_R·u_A)`.
 *
 * # Safety
 * `u_a` and `u_r` must point to three doubles each; `out` must be valid.
 */
enum TsStatus ts_detection_probability(const double *u_a,
                                       const double *u_r,
                                       double c,
                                       double tau1,
                                       double t_sq,
                                       double *out);

/**
 * Run one measurement cycle with the configured model, leads and gate state.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum TsStatus ts_cycle_run(const struct TsConfig *cfg, struct TsCycleSummary *out);

/**
 * Draw the pulse count of `n` independent cycles with probability `pr`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TsStatus ts_sample_cycles(double pr, uint64_t n, uint64_t seed, struct TsShotRecord *out);

/**
 * Build the tomography design for the configured settings, or the default
 * grid when none are configured.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum TsStatus ts_design_build(const struct TsConfig *cfg, struct TsDesign **out);

/**
 * Numerical rank of the design matrix.
 *
 * # Safety
 * `design` must be a live handle and `out` a valid pointer.
 */
enum TsStatus ts_design_rank(const struct TsDesign *design, size_t *out);

/**
 * Number of measurement settings (rows).
 *
 * # Safety
 * `design` must be a live handle and `out` a valid pointer.
 */
enum TsStatus ts_design_n_settings(const struct TsDesign *design, size_t *out);

/**
 * Number of state parameters (3 or 15).
 *
 * # Safety
 * `design` must be a live handle and `out` a valid pointer.
 */
enum TsStatus ts_design_n_params(const struct TsDesign *design, size_t *out);

/**
 * Ratio of largest to smallest retained singular value; infinity when the
 * rank is zero.
 *
 * # Safety
 * `design` must be a live handle and `out` a valid pointer.
 */
enum TsStatus ts_design_condition_number(const struct TsDesign *design, double *out);

/**
 * Minimum-norm least-squares reconstruction from measured pulse
 * probabilities. `n_pr` must equal the number of settings and `n_theta` the
 * number of parameters.
 *
 * # Safety
 * `pr` must point to `n_pr` doubles and `theta_out` to `n_theta` writable
 * doubles.
 */
enum TsStatus ts_design_reconstruct(const struct TsDesign *design,
                                    const double *pr,
                                    size_t n_pr,
                                    double *theta_out,
                                    size_t n_theta);

/**
 * Release a design handle. Null is ignored.
 *
 * # Safety
 * `design` must be null or a handle not yet freed.
 */
void ts_design_free(struct TsDesign *design);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TURNSTILE_H */

#ifndef GEOFLUID_H
#define GEOFLUID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bumped whenever a signature or layout in this header changes.
 */
#define GF_ABI_VERSION 1

/**
 * Result codes.
 */
typedef enum GfStatus {
  GF_STATUS_OK = 0,
  GF_STATUS_NULL_POINTER = 1,
  GF_STATUS_INVALID_UTF8 = 2,
  GF_STATUS_CONFIG = 3,
  GF_STATUS_GEOMETRY = 4,
  GF_STATUS_NUMERIC = 5,
  GF_STATUS_CLASSIFICATION = 6,
  GF_STATUS_IO = 7,
  GF_STATUS_BUFFER_TOO_SMALL = 8,
  GF_STATUS_PANIC = 9,
} GfStatus;

/**
 * Opaque coordinate chart with its metric.
 */
typedef struct GfChart GfChart;

/**
 * Opaque equation of state.
 */
typedef struct GfEos GfEos;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI version of this library; compare with `GF_ABI_VERSION` from the header.
 */
uint32_t gf_abi_version(void);

/**
 * Message of the last failed call on this thread; empty after a success. The pointer
 * stays valid until the next call into the library from the same thread.
 */
const char *gf_last_error_message(void);

/**
 * Built-in chart by name (`flat_torus`, `torus_of_revolution`, `unit_sphere`, `flat_patch`
 * or their short names M1..M4) in dimension `dim`, default parameters.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum GfStatus gf_chart_builtin(const char *name, size_t dim, struct GfChart **out);

/**
 * # Safety
 * `chart` must come from `gf_chart_builtin` and not be freed twice. Null is ignored.
 */
void gf_chart_free(struct GfChart *chart);

/**
 * Chart dimension, or 0 for a null handle.
 *
 * # Safety
 * `chart` must be null or a live handle.
 */
size_t gf_chart_dim(const struct GfChart *chart);

/**
 * Christoffel symbols Γ^i_{jk} at `x` (length n), written to `out` at index (i·n + j)·n + k.
 * `out_len` must be at least n³.
 *
 * # Safety
 * `x` must hold `x_len` doubles and `out` must hold `out_len` doubles.
 */
enum GfStatus gf_christoffel(const struct GfChart *chart,
                             const double *x,
                             size_t x_len,
                             double *out,
                             size_t out_len);

/**
 * Scalar curvature at `x`.
 *
 * # Safety
 * `x` must hold `x_len` doubles and `out` must be writable.
 */
enum GfStatus gf_scalar_curvature(const struct GfChart *chart,
                                  const double *x,
                                  size_t x_len,
                                  double *out);

/**
 * Equation of state from a TOML table such as `variant = "polytropic"` plus its fields.
 * `dim` fixes the default polytropic exponent.
 *
 * # Safety
 * `toml_text` must be a NUL-terminated string; `out` must be writable.
 */
enum GfStatus gf_eos_from_toml(const char *toml_text, size_t dim, struct GfEos **out);

/**
 * # Safety
 * `eos` must come from `gf_eos_from_toml` and not be freed twice. Null is ignored.
 */
void gf_eos_free(struct GfEos *eos);

/**
 * Pressure and its first partials: `out[0] = P`, `out[1] = ∂P/∂ρ`, `out[2] = ∂P/∂S`.
 *
 * # Safety
 * `out` must hold 3 doubles.
 */
enum GfStatus gf_eos_pressure(const struct GfEos *eos, double rho, double s, double *out);

/**
 * Runs a subcommand (`simulate`, `verify-densities`, ...) on a scenario file path or bundled
 * name, writing artifacts under `out_dir`. On success `*summary_json` receives the summary
 * (free with `gf_string_free`) and `*exit_code` the CLI exit code for the outcome.
 *
 * # Safety
 * String arguments must be NUL-terminated; `summary_json` and `exit_code` must be writable.
 */
enum GfStatus gf_run_scenario(const char *scenario,
                              const char *command,
                              const char *out_dir,
                              bool allow_incompatible,
                              char **summary_json,
                              int32_t *exit_code);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void gf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEOFLUID_H */

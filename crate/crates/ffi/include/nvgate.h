#ifndef NVGATE_H
#define NVGATE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum NvgStatus {
  NVG_STATUS_OK = 0,
  NVG_STATUS_INVALID_ARGUMENT = 1,
  NVG_STATUS_CONFIG = 2,
  NVG_STATUS_NUMERICAL = 3,
  NVG_STATUS_IO = 4,
  NVG_STATUS_PANIC = 5,
} NvgStatus;

/**
 * Output encoding codes for `nvg_result_write`.
 */
typedef enum NvgFormat {
  NVG_FORMAT_CSV = 0,
  NVG_FORMAT_JSONL = 1,
} NvgFormat;

/**
 * Closed-form sensor population variant codes.
 */
typedef enum NvgAnalyticVariant {
  NVG_ANALYTIC_VARIANT_SECULAR = 0,
  NVG_ANALYTIC_VARIANT_FULL_COUPLING = 1,
} NvgAnalyticVariant;

/**
 * Validated run configuration.
 */
typedef struct NvgConfig NvgConfig;

/**
 * Outcome of a run: a sweep (axis plus series) or a scalar table.
 */
typedef struct NvgResult NvgResult;

/**
 * Scalars of the effective nuclear model; rates in rad/s or 1/s.
 */
typedef struct NvgEffectiveScalars {
  double g_e;
  double g_e_prime;
  double p;
  double gamma_r;
  double gamma_n;
  double validity_ratio;
  double transfer_time;
} NvgEffectiveScalars;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *nvg_last_error(void);

/**
 * Library version as a static string.
 */
const char *nvg_version(void);

/**
 * Parses and validates a TOML config file. `experiment_name` may be null to use
 * the file's own `experiment` key. Names are kebab-case, e.g. `sweep-rf`.
 *
 * # Safety
 * `path` and `experiment_name` are null or NUL-terminated; `out` is writable.
 */
enum NvgStatus nvg_config_from_file(const char *path,
                                    const char *experiment_name,
                                    struct NvgConfig **out);

/**
 * Parses and validates TOML config text.
 *
 * # Safety
 * `toml` and `experiment_name` are null or NUL-terminated; `out` is writable.
 */
enum NvgStatus nvg_config_from_str(const char *toml,
                                   const char *experiment_name,
                                   struct NvgConfig **out);

/**
 * # Safety
 * `cfg` is null or came from `nvg_config_from_*` and is not used afterwards.
 */
void nvg_config_free(struct NvgConfig *cfg);

/**
 * Effective-model scalars of the configured register.
 *
 * # Safety
 * `cfg` is a live config handle; `out` is writable.
 */
enum NvgStatus nvg_effective_scalars(const struct NvgConfig *cfg, struct NvgEffectiveScalars *out);

/**
 * Runs the configured experiment.
 *
 * # Safety
 * `cfg` is a live config handle; `out` is writable.
 */
enum NvgStatus nvg_run(const struct NvgConfig *cfg, struct NvgResult **out);

/**
 * # Safety
 * `res` is null or came from `nvg_run` and is not used afterwards.
 */
void nvg_result_free(struct NvgResult *res);

/**
 * 1 for a scalar table, 0 for a sweep, -1 for a null handle.
 *
 * # Safety
 * `res` is null or a live result handle.
 */
int nvg_result_is_table(const struct NvgResult *res);

/**
 * Shape of the result. Sweeps: one row per axis point, column 0 is the
 * axis. Tables: one row per quantity and a single value column.
 *
 * # Safety
 * `res` is a live result handle; `rows` and `columns` are writable.
 */
enum NvgStatus nvg_result_shape(const struct NvgResult *res, size_t *rows, size_t *columns);

/**
 * Column name of a sweep, or the `quantity [unit]` label of a table row.
 * The string lives as long as the result handle; null when out of range.
 *
 * # Safety
 * `res` is null or a live result handle.
 */
const char *nvg_result_label(const struct NvgResult *res, size_t index);

/**
 * Value at `(row, column)`.
 *
 * # Safety
 * `res` is a live result handle; `out` is writable.
 */
enum NvgStatus nvg_result_value(const struct NvgResult *res,
                                size_t row,
                                size_t column,
                                double *out);

/**
 * Writes the result to `path` in the CLI's CSV or JSON-lines layout;
 * `format` is an `NvgFormat` code.
 *
 * # Safety
 * `res` is a live result handle; `path` is NUL-terminated.
 */
enum NvgStatus nvg_result_write(const struct NvgResult *res, const char *path, int format);

/**
 * Closed-form sensor population at detuning `delta` (rad/s), sensor
 * angle `theta` (rad), coupling `g` (rad/s) and time `t` (s); `variant` is
 * an `NvgAnalyticVariant` code.
 *
 * # Safety
 * `out` is writable.
 */
enum NvgStatus nvg_analytic_population(double delta,
                                       double theta,
                                       double g,
                                       double t,
                                       int variant,
                                       double *out);

/**
 * Quasi-steady electron polarization `exp(-t_reset / t1rho)`.
 *
 * # Safety
 * `out` is writable.
 */
enum NvgStatus nvg_quasi_steady_polarization(double t_reset, double t1rho, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NVGATE_H */

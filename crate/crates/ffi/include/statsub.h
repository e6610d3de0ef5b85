#ifndef STATSUB_H
#define STATSUB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define STATSUB_OK 0

#define STATSUB_ERR_NULL 1

#define STATSUB_ERR_UTF8 2

#define STATSUB_ERR_MANIFEST 3

#define STATSUB_ERR_UNKNOWN_EXAMPLE 4

#define STATSUB_ERR_NUMERIC 5

#define STATSUB_ERR_ARGUMENT 6

#define STATSUB_ERR_PANIC 7

#define STATSUB_FORMAT_JSON 0

#define STATSUB_FORMAT_MARKDOWN 1

/**
 * Use the manifest's curvature conventions.
 */
#define STATSUB_CONVENTION_MANIFEST 0

#define STATSUB_CONVENTION_PLUS 1

#define STATSUB_CONVENTION_MINUS -1

#define STATSUB_CONVENTION_BOTH 2

/**
 * A validated manifest.
 */
typedef struct StatsubManifest StatsubManifest;

/**
 * A finished report.
 */
typedef struct StatsubReport StatsubReport;

/**
 * Run overrides; zero-initialized means "use the manifest".
 */
typedef struct StatsubRunOptions {
  /**
   * Random sample count; 0 keeps the manifest's.
   */
  uint64_t points;
  uint64_t seed;
  /**
   * Nonzero to apply `seed`.
   */
  uint8_t has_seed;
  /**
   * Tolerance multiplier; values ≤ 0 mean 1.
   */
  double tol_scale;
  /**
   * One of the `STATSUB_CONVENTION_*` values.
   */
  int32_t convention;
} StatsubRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *statsub_last_error(void);

/**
 * Parses and validates a JSON manifest.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t statsub_manifest_from_json(const char *json, struct StatsubManifest **out);

/**
 * Loads a shipped example with its printed values.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t statsub_manifest_builtin(const char *name, struct StatsubManifest **out);

/**
 * # Safety
 * `manifest` must come from this library and not be freed twice.
 */
void statsub_manifest_free(struct StatsubManifest *manifest);

/**
 * Chart dimension of the source manifold.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t statsub_manifest_dimension(const struct StatsubManifest *manifest, size_t *out);

/**
 * Scalar curvature of the source connection at `point` under `convention`
 * (`STATSUB_CONVENTION_PLUS` or `_MINUS`).
 *
 * # Safety
 * `point` must hold `dim` doubles; other pointers must be valid.
 */
int32_t statsub_scalar_curvature(const struct StatsubManifest *manifest,
                                 const double *point,
                                 size_t dim,
                                 int32_t convention,
                                 double *out);

/**
 * Runs every analysis the manifest requests. `options` may be null.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle to free with
 * [`statsub_report_free`].
 */
int32_t statsub_run(const struct StatsubManifest *manifest,
                    const struct StatsubRunOptions *options,
                    struct StatsubReport **out);

/**
 * # Safety
 * `report` must come from this library and not be freed twice.
 */
void statsub_report_free(struct StatsubReport *report);

/**
 * Number of warnings in the report.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t statsub_report_warning_count(const struct StatsubReport *report, size_t *out);

/**
 * Renders the report as JSON or markdown into a new string, released with
 * [`statsub_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t statsub_report_render(const struct StatsubReport *report, int32_t format, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void statsub_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *statsub_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STATSUB_H */

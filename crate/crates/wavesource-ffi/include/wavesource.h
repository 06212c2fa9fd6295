/* C interface to the wavesource reconstruction library.
* Generated by cbindgen; do not edit by hand. */

#ifndef WAVESOURCE_H
#define WAVESOURCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define WS_OK 0

/**
 * Null pointer or malformed UTF-8 handed across the boundary.
 */
#define WS_ERR_MISUSE 1

/**
 * Invalid configuration or out-of-domain parameter.
 */
#define WS_ERR_CONFIG 2

/**
 * Structurally degenerate problem (unrecoverable modes, no noise, …).
 */
#define WS_ERR_DEGENERATE 3

/**
 * Filesystem failure while reading configs or writing artifacts.
 */
#define WS_ERR_IO 4

/**
 * Opaque handle to a validated experiment configuration.
 */
typedef struct WsConfig WsConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON experiment config.
 *
 * On success writes a fresh handle to `out` and returns `WS_OK`; the caller
 * owns the handle and must release it with `ws_config_free`. On failure
 * `out` is untouched and the return code classifies the problem.
 *
 * # Safety
 * `json` must be a valid NUL-terminated C string and `out` a valid pointer
 * to writable memory for one pointer.
 */
int32_t ws_config_parse(const char *json, struct WsConfig **out);

/**
 * Reads and parses a JSON experiment config from a file path.
 *
 * # Safety
 * `path` must be a valid NUL-terminated C string and `out` a valid pointer
 * to writable memory for one pointer.
 */
int32_t ws_config_parse_file(const char *path, struct WsConfig **out);

/**
 * Releases a handle obtained from one of the parse functions. Passing null
 * is a no-op; passing the same handle twice is undefined behavior.
 *
 * # Safety
 * `cfg` must be null or a handle previously returned by this library that
 * has not been freed.
 */
void ws_config_free(struct WsConfig *cfg);

/**
 * Runs the experiment held by `cfg`.
 *
 * `output_dir` (nullable) overrides the config's artifact directory and
 * `seed` (nullable) overrides its master seed. On success, the primary
 * reconstruction error is written through `primary_error` and the secondary
 * one through `secondary_error` (NaN when the experiment kind has only one
 * metric); both pointers may be null when the caller does not need them.
 *
 * # Safety
 * `cfg` must be a live handle from this library; `output_dir` null or a
 * valid NUL-terminated C string; `seed` null or a valid pointer to a u64;
 * the error out-pointers null or valid for one f64 write each.
 */
int32_t ws_run(const struct WsConfig *cfg,
               const char *output_dir,
               const uint64_t *seed,
               double *primary_error,
               double *secondary_error);

/**
 * Exact cross integral ∫₀ᵀ A_k(t)·A_l(t) dt of two Duhamel kernels with
 * temporal frequencies `omega_k` and `omega_l` — a dependency-free numeric
 * smoke test for bindings.
 */
double ws_compute_i(double omega_k, double omega_l, double t_horizon);

/**
 * Returns the message of the most recent failure on this thread as a fresh
 * string the caller must release with `ws_string_free`, or null when the
 * last call succeeded.
 */
char *ws_last_error_message(void);

/**
 * Releases a string returned by this library. Passing null is a no-op.
 *
 * # Safety
 * `s` must be null or a string previously returned by this library that has
 * not been freed.
 */
void ws_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVESOURCE_H */

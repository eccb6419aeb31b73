/* C interface to the skewmix library. Auto-generated by cbindgen; do not edit. */

#ifndef SKEWMIX_H
#define SKEWMIX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define SMX_OK 0

// Malformed input: bad JSON, invalid parameters, null or non-UTF-8
// pointers, or an out-of-range argument.
#define SMX_ERR_INVALID 2

// The operation is undefined for this distribution (for example a
// required mixing moment does not exist).
#define SMX_ERR_UNSUPPORTED 3

// A numerical procedure failed, or the library panicked internally.
#define SMX_ERR_NUMERICAL 4

// Canonicalization via the Cholesky factor of the scale matrix.
#define SMX_METHOD_CP 0

// Canonicalization via joint diagonalization of scale and covariance.
#define SMX_METHOD_OMEGA_SIGMA 1

// Canonicalization via covariance and a fourth-moment scatter.
#define SMX_METHOD_SIGMA_KAPPA 2

// Opaque distribution handle.
typedef struct SmxDist SmxDist;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a distribution specification (the same JSON schema the CLI
// reads) into a handle, or returns null with the error retrievable via
// `smx_last_status` / `smx_last_error`.
//
// # Safety
// `json` must be null or a NUL-terminated string valid for reads.
struct SmxDist *smx_dist_parse_json(const char *json);

// Releases a handle. Null is ignored.
//
// # Safety
// `dist` must be null or a pointer returned by [`smx_dist_parse_json`]
// that has not already been freed.
void smx_dist_free(struct SmxDist *dist);

// Dimension of the distribution, or 0 for a null handle.
//
// # Safety
// `dist` must be null or a live handle from [`smx_dist_parse_json`].
size_t smx_dist_dim(const struct SmxDist *dist);

// Parameters and derived summaries as JSON (see the CLI `describe`
// report). Returns null on failure; free with [`smx_string_free`].
//
// # Safety
// `dist` must be null or a live handle from [`smx_dist_parse_json`].
char *smx_describe_json(const struct SmxDist *dist);

// Canonicalizing transform and canonical form as JSON (see the CLI
// `canonicalize` report). `method` is one of the `SMX_METHOD_*` values;
// `kappa_exponent` selects the fourth-moment scatter weight (1 or 2) and
// only matters for `SMX_METHOD_SIGMA_KAPPA`; `verify` embeds a
// verification block. Returns null on failure; free with
// [`smx_string_free`].
//
// # Safety
// `dist` must be null or a live handle from [`smx_dist_parse_json`].
char *smx_canonicalize_json(const struct SmxDist *dist,
                            int32_t method,
                            uint32_t kappa_exponent,
                            bool verify);

// Skewness/kurtosis indices as JSON (see the CLI `indices` report).
// `mc_n` of 0 skips the Monte-Carlo block; otherwise `mc_n` samples are
// drawn with `seed` and `bootstrap_resamples` resamples (0 skips the
// standard errors). Returns null on failure; free with
// [`smx_string_free`].
//
// # Safety
// `dist` must be null or a live handle from [`smx_dist_parse_json`].
char *smx_indices_json(const struct SmxDist *dist,
                       size_t mc_n,
                       uint64_t seed,
                       size_t bootstrap_resamples);

// Mode report as JSON (see the CLI `mode` report). Returns null on
// failure; free with [`smx_string_free`].
//
// # Safety
// `dist` must be null or a live handle from [`smx_dist_parse_json`].
char *smx_mode_json(const struct SmxDist *dist);

// Draws `n` samples into `out`, written row-major as `n` rows of
// `smx_dist_dim(dist)` columns. Returns `SMX_OK` or an error status.
//
// # Safety
// `dist` must be null or a live handle from [`smx_dist_parse_json`];
// `out` must be null or valid for writes of `n * smx_dist_dim(dist)`
// doubles.
int32_t smx_sample(const struct SmxDist *dist, size_t n, uint64_t seed, double *out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a pointer returned by one of the `*_json`
// functions that has not already been freed.
void smx_string_free(char *s);

// Status code of the most recent call on this thread: `SMX_OK` or one of
// the `SMX_ERR_*` values.
int32_t smx_last_status(void);

// Message for the most recent failure on this thread, or null after a
// success. The pointer is owned by the library and valid until the next
// skewmix call on the same thread; do not free it.
const char *smx_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEWMIX_H */

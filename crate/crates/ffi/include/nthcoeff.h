/* C interface to the nthcoeff engine.  Generated; do not edit. */

#ifndef NTHCOEFF_H
#define NTHCOEFF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * ABI revision; bumped on any breaking change to this surface.
 */
#define NC_ABI_VERSION 1

/**
 * Engine selector; `Auto` picks by field size exactly like the CLI.
 */
typedef enum NcAlgorithm {
  NC_ALGORITHM_AUTO = 0,
  NC_ALGORITHM_BIVARIATE = 1,
  NC_ALGORITHM_MATRIX = 2,
  NC_ALGORITHM_HERMITE_PADE = 3,
  NC_ALGORITHM_RECURRENCE = 4,
} NcAlgorithm;

/**
 * Result of every fallible entry point.
 */
typedef enum NcStatus {
  /**
   * The call succeeded.
   */
  NC_STATUS_OK = 0,
  /**
   * The instance file or target index was rejected.
   */
  NC_STATUS_INPUT = 1,
  /**
   * An internal invariant failed; the result cannot be trusted.
   */
  NC_STATUS_INTERNAL = 2,
  /**
   * Every randomized fallback for the requested engine was exhausted.
   */
  NC_STATUS_UNSUPPORTED = 3,
  /**
   * A null pointer or malformed argument was passed in.
   */
  NC_STATUS_ARGUMENT = 4,
} NcStatus;

/**
 * Opaque parsed instance: the defining data plus the file's target index.
 */
typedef struct NcInstance NcInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI revision of this library.
 */
uint32_t nc_abi_version(void);

/**
 * Message describing the most recent failure on this thread, as a
 * NUL-terminated string.  Empty when the last call succeeded.  The pointer
 * is invalidated by the next nthcoeff call on the same thread; copy the
 * contents if you need to keep them.
 */
const char *nc_last_error(void);

/**
 * Parse instance text (the `.nth` file format) into a handle.
 *
 * On success writes a freshly allocated handle to `*out`; release it with
 * `nc_instance_free`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NcStatus nc_parse(const char *text, struct NcInstance **out);

/**
 * Read and parse an instance file from disk.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NcStatus nc_parse_file(const char *path, struct NcInstance **out);

/**
 * Release a handle obtained from `nc_parse` or `nc_parse_file`.  Null is
 * ignored.
 *
 * # Safety
 * `handle` must have come from this library and not be freed twice.
 */
void nc_instance_free(struct NcInstance *handle);

/**
 * Basic shape of a parsed instance.  Each out-pointer may be null if the
 * caller does not need that field: `p`/`s` describe the coefficient field
 * F_{p^s}, `d`/`h` the `y`- and `t`-degrees of the defining polynomial.
 *
 * # Safety
 * `handle` must be a live handle from this library.
 */
enum NcStatus nc_instance_shape(const struct NcInstance *handle,
                                uint64_t *p,
                                uintptr_t *s,
                                uintptr_t *d,
                                uintptr_t *h);

/**
 * Compute the coefficient at index `n` (a decimal string; pass null to use
 * the index stored in the instance file).  On success writes the value to
 * `*out_value` as `s` space-separated residues, least-significant basis
 * coordinate first — the same rendering the CLI prints.  Free the string
 * with `nc_string_free`.
 *
 * `seed` drives the randomized choices some engines make; any fixed value
 * gives reproducible runs.
 *
 * # Safety
 * `handle` must be a live handle; `n` null or NUL-terminated; `out_value`
 * a valid pointer.
 */
enum NcStatus nc_compute(const struct NcInstance *handle,
                         const char *n,
                         enum NcAlgorithm algorithm,
                         uint64_t seed,
                         char **out_value);

/**
 * Like `nc_compute`, but writes the full run report as a compact JSON
 * object (engine, field, degrees, index, digit count, value).  The JSON is
 * byte-for-byte reproducible for identical inputs.
 *
 * # Safety
 * Same contract as `nc_compute`.
 */
enum NcStatus nc_compute_json(const struct NcInstance *handle,
                              const char *n,
                              enum NcAlgorithm algorithm,
                              uint64_t seed,
                              char **out_json);

/**
 * Release a string returned through any out-pointer of this library.  Null
 * is ignored.
 *
 * # Safety
 * `s` must have come from this library and not be freed twice.
 */
void nc_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NTHCOEFF_H */

#ifndef SCAUCTION_H
#define SCAUCTION_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SCA_OK 0

#define SCA_ERR_INVALID_ARGUMENT 1

#define SCA_ERR_PARSE 2

#define SCA_ERR_CAPACITY 3

#define SCA_ERR_INTEGRITY 4

#define SCA_ERR_INTERNAL 5

/**
 * A validated auction instance.
 */
typedef struct ScaInstance ScaInstance;

/**
 * Outcome of one mechanism run, with payments when requested.
 */
typedef struct ScaResult ScaResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the calling thread's last failure, or null. Owned by the
 * library and valid until the next failing call on this thread.
 */
const char *sca_last_error(void);

/**
 * Library version as a static string.
 */
const char *sca_version(void);

/**
 * # Safety
 * `s` must be null or come from this library.
 */
void sca_string_free(char *s);

/**
 * Parses an instance from JSON text.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
int32_t sca_instance_from_json(const char *json, struct ScaInstance **out);

/**
 * # Safety
 * `instance` must be null or a handle from `sca_instance_from_json`.
 */
void sca_instance_free(struct ScaInstance *instance);

/**
 * # Safety
 * `instance` must be a live handle and the out-pointers valid.
 */
int32_t sca_instance_shape(const struct ScaInstance *instance, size_t *players, uint64_t *items);

/**
 * Runs `mechanism` ("kminded", "general", "singleminded" or "vcg") with
 * accuracy `epsilon` ("p/q"). When `payments` is "threshold" or "exact"
 * the result also carries payments; pass null to skip them.
 *
 * # Safety
 * Pointers must be valid; strings nul-terminated.
 */
int32_t sca_solve(const struct ScaInstance *instance,
                  const char *mechanism,
                  const char *epsilon,
                  const char *payments,
                  struct ScaResult **out);

/**
 * # Safety
 * `result` must be null or a handle from `sca_solve`.
 */
void sca_result_free(struct ScaResult *result);

/**
 * Items allocated to `player`.
 *
 * # Safety
 * `result` must be a live handle and `out` valid.
 */
int32_t sca_result_quantity(const struct ScaResult *result, size_t player, uint64_t *out);

/**
 * Welfare as a decimal string; free with `sca_string_free`.
 *
 * # Safety
 * `result` must be a live handle and `out` valid.
 */
int32_t sca_result_welfare(const struct ScaResult *result, char **out);

/**
 * `player`'s payment as "p/q"; free with `sca_string_free`.
 *
 * # Safety
 * `result` must be a live handle and `out` valid.
 */
int32_t sca_result_payment(const struct ScaResult *result, size_t player, char **out);

/**
 * Runs a verification suite with default options and the given seed.
 * `passed` is set to 1 or 0 and `report` receives the JSON report (free
 * with `sca_string_free`).
 *
 * # Safety
 * `suite` must be nul-terminated; out-pointers valid.
 */
int32_t sca_verify(const char *suite, uint64_t seed, int32_t *passed, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCAUCTION_H */

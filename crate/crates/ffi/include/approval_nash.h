#ifndef APPROVAL_NASH_H
#define APPROVAL_NASH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum ApprovalStatus {
  APPROVAL_STATUS_OK = 0,
  APPROVAL_STATUS_NULL_POINTER = 1,
  APPROVAL_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad candidate names, voter index out of range, malformed weights.
   */
  APPROVAL_STATUS_CONTRACT = 3,
  /**
   * The analysis does not apply to this input.
   */
  APPROVAL_STATUS_PRECONDITION = 4,
  /**
   * An exhaustive search would exceed its cap.
   */
  APPROVAL_STATUS_CAPACITY = 5,
  APPROVAL_STATUS_INVARIANT = 6,
  APPROVAL_STATUS_PARSE = 7,
  APPROVAL_STATUS_CONFIG = 8,
  APPROVAL_STATUS_IO = 9,
  /**
   * An enum argument is out of range.
   */
  APPROVAL_STATUS_INVALID_ARGUMENT = 10,
  APPROVAL_STATUS_PANIC = 11,
} ApprovalStatus;

/**
 * Values for the `kind` argument of [`approval_find_pne`].
 */
typedef enum ApprovalEquilibriumKind {
  APPROVAL_EQUILIBRIUM_KIND_PLAIN = 0,
  APPROVAL_EQUILIBRIUM_KIND_LAZY = 1,
  APPROVAL_EQUILIBRIUM_KIND_SINCERE = 2,
} ApprovalEquilibriumKind;

/**
 * Values for the `kind` argument of [`approval_construct_pne`].
 */
typedef enum ApprovalConstruction {
  APPROVAL_CONSTRUCTION_CONTAINMENT = 0,
  APPROVAL_CONSTRUCTION_SINCERE = 1,
} ApprovalConstruction;

/**
 * Opaque election instance.
 */
typedef struct ApprovalInstance ApprovalInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses an instance from its text form.
 *
 * # Safety
 * `source` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum ApprovalStatus approval_instance_parse(const char *source, struct ApprovalInstance **out);

/**
 * Loads an instance file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum ApprovalStatus approval_instance_load(const char *path, struct ApprovalInstance **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `instance` must come from this library and not be freed twice.
 */
void approval_instance_free(struct ApprovalInstance *instance);

/**
 * Writes the number of candidates, voters and the committee size.
 *
 * # Safety
 * All pointers must be valid.
 */
enum ApprovalStatus approval_instance_size(const struct ApprovalInstance *handle,
                                           size_t *m,
                                           size_t *n,
                                           size_t *k);

/**
 * The instance in its text form.
 *
 * # Safety
 * `handle` and `out` must be valid.
 */
enum ApprovalStatus approval_instance_serialize(const struct ApprovalInstance *handle, char **out);

/**
 * Runs the rule on a ballot profile. Result:
 * `{"committee": "{a,c}", "counts": [..]}`.
 *
 * # Safety
 * `weights` may be null; other pointers must be valid.
 */
enum ApprovalStatus approval_elect(const struct ApprovalInstance *handle,
                                   const char *weights,
                                   const char *profile,
                                   char **out);

/**
 * OWA utility of a committee for one voter, as an exact rational `p/q`
 * (or an integer).
 *
 * # Safety
 * All pointers must be valid.
 */
enum ApprovalStatus approval_owa_utility(const struct ApprovalInstance *handle,
                                         size_t voter,
                                         const char *committee,
                                         char **out);

/**
 * Best responses of `voter` to `profile` (the voter's own entry is
 * ignored). `restriction >= m` means unrestricted.
 *
 * # Safety
 * `weights` may be null; other pointers must be valid.
 */
enum ApprovalStatus approval_best_response(const struct ApprovalInstance *handle,
                                           const char *weights,
                                           size_t voter,
                                           const char *profile,
                                           size_t restriction,
                                           char **out);

/**
 * Enumerates equilibria of one [`ApprovalEquilibriumKind`]. With `pruned`
 * (lazy kind, AV only) the pruned enumerator is used. An empty
 * `committees` list is a successful answer: no equilibrium exists.
 *
 * # Safety
 * `weights` may be null; other pointers must be valid.
 */
enum ApprovalStatus approval_find_pne(const struct ApprovalInstance *handle,
                                      const char *weights,
                                      uint32_t kind,
                                      bool pruned,
                                      char **out);

/**
 * Builds an equilibrium with one of the [`ApprovalConstruction`]s (AV
 * only). `target` (containment only, may be null) names a committee to
 * test; `non_empty` (sincere only) makes abstainers approve everyone.
 *
 * # Safety
 * `target` may be null; other pointers must be valid.
 */
enum ApprovalStatus approval_construct_pne(const struct ApprovalInstance *handle,
                                           uint32_t kind,
                                           bool non_empty,
                                           const char *target,
                                           char **out);

/**
 * Message of the last failing call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *approval_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void approval_string_free(char *s);

/**
 * Library version, a static string.
 */
const char *approval_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APPROVAL_NASH_H */

#ifndef ENSNET_H
#define ENSNET_H

/* Generated by cbindgen from ensnet-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum EnsnetStatus {
  ENSNET_STATUS_OK = 0,
  /**
   * A pointer was null or an argument was out of range.
   */
  ENSNET_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The run configuration failed to parse or validate.
   */
  ENSNET_STATUS_CONFIG = 2,
  /**
   * Rejection sampling exhausted max_attempts.
   */
  ENSNET_STATUS_ACCEPTANCE_TOO_LOW = 3,
  /**
   * The filesystem said no.
   */
  ENSNET_STATUS_IO = 4,
  /**
   * The dataset is malformed.
   */
  ENSNET_STATUS_DATA = 5,
  /**
   * An enumeration or resource cap was exceeded.
   */
  ENSNET_STATUS_RESOURCE_LIMIT = 6,
  /**
   * The artifact failed validation.
   */
  ENSNET_STATUS_ARTIFACT = 7,
  /**
   * A panic was caught at the boundary.
   */
  ENSNET_STATUS_INTERNAL = 8,
} EnsnetStatus;

/**
 * Opaque handle to a built or loaded ensemble.
 */
typedef struct EnsnetEnsemble EnsnetEnsemble;

/**
 * Opaque handle to a loaded training set.
 */
typedef struct EnsnetTrainingSet EnsnetTrainingSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *ensnet_version(void);

/**
 * Message for the most recent failure on this thread. Empty string when
 * the last call succeeded; the pointer is valid until the next ensnet call
 * on the same thread.
 */
const char *ensnet_last_error_message(void);

/**
 * Load a labeled CSV dataset (`x1,...,xN,label` header).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum EnsnetStatus ensnet_training_set_load(const char *path, struct EnsnetTrainingSet **out);

/**
 * Build a training set from a row-major coordinate array of
 * `n_points * input_dim` doubles plus one 0/1 label per point.
 *
 * # Safety
 * `xs` must hold `n_points * input_dim` doubles, `labels` `n_points`
 * bytes, and `out` must be a valid pointer.
 */
enum EnsnetStatus ensnet_training_set_from_arrays(const double *xs,
                                                  size_t n_points,
                                                  size_t input_dim,
                                                  const uint8_t *labels,
                                                  struct EnsnetTrainingSet **out);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `ts` must be null or a live handle from this library.
 */
size_t ensnet_training_set_len(const struct EnsnetTrainingSet *ts);

/**
 * Input dimension, or 0 for a null handle.
 *
 * # Safety
 * `ts` must be null or a live handle from this library.
 */
size_t ensnet_training_set_input_dim(const struct EnsnetTrainingSet *ts);

/**
 * # Safety
 * `ts` must be a pointer from this library, not yet freed; null is a no-op.
 */
void ensnet_training_set_free(struct EnsnetTrainingSet *ts);

/**
 * Build an ensemble from a JSON run config (same document the CLI reads).
 *
 * # Safety
 * `config_json` must be NUL-terminated, `ts` a live handle, `out` valid.
 */
enum EnsnetStatus ensnet_ensemble_build(const char *config_json,
                                        const struct EnsnetTrainingSet *ts,
                                        struct EnsnetEnsemble **out);

/**
 * Load an ensemble artifact file, re-validating every invariant.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` valid.
 */
enum EnsnetStatus ensnet_ensemble_load(const char *path, struct EnsnetEnsemble **out);

/**
 * Write the ensemble artifact to `path`.
 *
 * # Safety
 * `ens` must be a live handle and `path` NUL-terminated.
 */
enum EnsnetStatus ensnet_ensemble_save(const struct EnsnetEnsemble *ens, const char *path);

/**
 * Number of members, or 0 for a null handle.
 *
 * # Safety
 * `ens` must be null or a live handle from this library.
 */
size_t ensnet_ensemble_member_count(const struct EnsnetEnsemble *ens);

/**
 * Input dimension, or 0 for a null handle.
 *
 * # Safety
 * `ens` must be null or a live handle from this library.
 */
size_t ensnet_ensemble_input_dim(const struct EnsnetEnsemble *ens);

/**
 * Weighted-average value and standard error at a point.
 *
 * # Safety
 * `x` must hold `len` doubles; `out_value` and `out_std_error` are written
 * on success and may not be null.
 */
enum EnsnetStatus ensnet_ensemble_evaluate(const struct EnsnetEnsemble *ens,
                                           const double *x,
                                           size_t len,
                                           double *out_value,
                                           double *out_std_error);

/**
 * Class decision at a point: 1 iff the averaged value is at least 0.5.
 *
 * # Safety
 * `x` must hold `len` doubles; `out_label` may not be null.
 */
enum EnsnetStatus ensnet_ensemble_predict(const struct EnsnetEnsemble *ens,
                                          const double *x,
                                          size_t len,
                                          uint8_t *out_label);

/**
 * # Safety
 * `ens` must be a pointer from this library, not yet freed; null is a no-op.
 */
void ensnet_ensemble_free(struct EnsnetEnsemble *ens);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENSNET_H */

#ifndef SHARPSET_H
#define SHARPSET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SharpsetSolver {
  SharpsetSolver_Benson = 0,
  SharpsetSolver_Cutplane = 1,
  SharpsetSolver_Probabilistic = 2,
  SharpsetSolver_Oracle = 3,
} SharpsetSolver;

typedef enum SharpsetStatus {
  SharpsetStatus_Ok = 0,
  SharpsetStatus_NullPointer = 1,
  SharpsetStatus_InvalidUtf8 = 2,
  SharpsetStatus_InvalidModel = 3,
  SharpsetStatus_Refused = 4,
  SharpsetStatus_OutOfRange = 5,
  SharpsetStatus_Io = 6,
  SharpsetStatus_Panic = 7,
} SharpsetStatus;

/**
 * Opaque local model.
 */
typedef struct SharpsetModel SharpsetModel;

/**
 * Opaque solver output.
 */
typedef struct SharpsetReport SharpsetReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sharpset_version(void);

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *sharpset_last_error(void);

/**
 * Parses and validates a model given as JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SharpsetStatus sharpset_model_from_json(const char *json, struct SharpsetModel **out);

/**
 * # Safety
 * `model` must come from [`sharpset_model_from_json`] and not be freed twice.
 */
void sharpset_model_free(struct SharpsetModel *model);

/**
 * Runs a solver on a model. `k` and `seed` are used by the probabilistic
 * solver only; `k = 0` keeps the default sample size.
 *
 * # Safety
 * `model` must be a live handle and `out` a writable pointer.
 */
enum SharpsetStatus sharpset_solve(const struct SharpsetModel *model,
                                   enum SharpsetSolver solver,
                                   size_t k,
                                   uint64_t seed,
                                   struct SharpsetReport **out);

/**
 * # Safety
 * `report` must come from [`sharpset_solve`] and not be freed twice.
 */
void sharpset_report_free(struct SharpsetReport *report);

/**
 * Number of inequalities after redundancy elimination, or 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t sharpset_report_count(const struct SharpsetReport *report);

/**
 * Length of every inequality vector (the number of outcomes `D^T`).
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t sharpset_report_dim(const struct SharpsetReport *report);

/**
 * Copies inequality `index` into `num`/`den`, each of length `len`. Fails
 * with `OutOfRange` when the index or length is wrong or a coefficient does
 * not fit in 64 bits.
 *
 * # Safety
 * `num` and `den` must point to `len` writable `int64_t` values.
 */
enum SharpsetStatus sharpset_report_vector(const struct SharpsetReport *report,
                                           size_t index,
                                           int64_t *num,
                                           int64_t *den,
                                           size_t len);

/**
 * Rendered form of inequality `index`, or null when out of range.
 *
 * # Safety
 * `report` must be null or a live handle. Release the result with
 * [`sharpset_string_free`].
 */
char *sharpset_report_rendered(const struct SharpsetReport *report, size_t index);

/**
 * Whole report as JSON, or null for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle. Release the result with
 * [`sharpset_string_free`].
 */
char *sharpset_report_json(const struct SharpsetReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void sharpset_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SHARPSET_H */

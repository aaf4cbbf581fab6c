/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef MMINF_H
#define MMINF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MminfStatus {
  MMINF_STATUS_OK = 0,
  /*
   A validation check exceeded its tolerance.
   */
  MMINF_STATUS_CHECK_FAILED = 1,
  /*
   Unparseable or invalid model, or bad arguments.
   */
  MMINF_STATUS_INVALID_INPUT = 2,
  /*
   The computation broke down numerically.
   */
  MMINF_STATUS_NUMERIC = 3,
  MMINF_STATUS_NULL_POINTER = 4,
  /*
   The output array is shorter than required.
   */
  MMINF_STATUS_BUFFER_TOO_SMALL = 5,
  /*
   A Rust panic was caught at the boundary.
   */
  MMINF_STATUS_PANIC = 6,
} MminfStatus;

typedef enum MminfFormat {
  MMINF_FORMAT_TOML = 0,
  MMINF_FORMAT_JSON = 1,
} MminfFormat;

typedef enum MminfWeighting {
  MMINF_WEIGHTING_EMBEDDED = 0,
  MMINF_WEIGHTING_OCCUPANCY = 1,
} MminfWeighting;

/*
 Opaque model handle.
 */
typedef struct MminfModel MminfModel;

/*
 Simulation settings; fill with [`mminf_sim_config_default`] and adjust.
 */
typedef struct MminfSimConfig {
  double warmup;
  /*
   End of each replication, warmup included.
   */
  double horizon;
  double sampling_interval;
  uint32_t replications;
  uint64_t seed;
  /*
   Highest factorial moment estimated, 1 to 6.
   */
  uint32_t max_order;
} MminfSimConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses and validates a model document. On success `*out` owns a new
 handle; on failure it is set to NULL.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MminfStatus mminf_model_from_str(const char *text,
                                      enum MminfFormat format,
                                      struct MminfModel **out);

/*
 Releases a handle. NULL is ignored.

 # Safety
 `model` must come from [`mminf_model_from_str`] and not be used afterwards.
 */
void mminf_model_free(struct MminfModel *model);

/*
 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum MminfStatus mminf_model_state_count(const struct MminfModel *model, size_t *out);

/*
 Writes `E[N(N-1)...(N-n+1)]` for `n = 0..=order` into `out`, which must
 hold at least `order + 1` values.

 # Safety
 `model` must be a live handle and `out` valid for `len` writes.
 */
enum MminfStatus mminf_factorial_moments(const struct MminfModel *model,
                                         uint32_t order,
                                         enum MminfWeighting weighting,
                                         double *out,
                                         size_t len);

/*
 Writes `E[N^n]` for `n = 0..=order`; see [`mminf_factorial_moments`].

 # Safety
 `model` must be a live handle and `out` valid for `len` writes.
 */
enum MminfStatus mminf_raw_moments(const struct MminfModel *model,
                                   uint32_t order,
                                   enum MminfWeighting weighting,
                                   double *out,
                                   size_t len);

/*
 Runs the `validate` check battery with default tolerances. Returns
 `MMINF_CHECK_FAILED` if any required check fails; `*failed` (if not
 NULL) receives the number of failing checks.

 # Safety
 `model` must be a live handle; `failed` may be NULL.
 */
enum MminfStatus mminf_validate(const struct MminfModel *model, uint32_t order, uint32_t *failed);

/*
 Fills `out` with defaults scaled to the model.

 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum MminfStatus mminf_sim_config_default(const struct MminfModel *model,
                                          struct MminfSimConfig *out);

/*
 Simulates and writes factorial-moment estimates for orders
 `1..=max_order` into `estimates` and their standard errors into
 `std_errors`; both must hold `max_order` values.

 # Safety
 `model` and `config` must be valid; both output arrays valid for `len` writes.
 */
enum MminfStatus mminf_simulate(const struct MminfModel *model,
                                const struct MminfSimConfig *config,
                                double *estimates,
                                double *std_errors,
                                size_t len);

/*
 Message for the last failing call on this thread, or NULL. Valid until
 the next call into this library from the same thread.
 */
const char *mminf_last_error_message(void);

/*
 Library version, a static NUL-terminated string.
 */
const char *mminf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MMINF_H */

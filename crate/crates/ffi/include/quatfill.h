#ifndef QUATFILL_H
#define QUATFILL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes returned by fallible functions.
 */
typedef enum QfStatus {
  QF_STATUS_OK = 0,
  QF_STATUS_NULL_POINTER = 1,
  QF_STATUS_INVALID_ARGUMENT = 2,
  QF_STATUS_SHAPE_MISMATCH = 3,
  QF_STATUS_DECOMPOSITION = 4,
  QF_STATUS_IO = 5,
  QF_STATUS_FORMAT = 6,
  QF_STATUS_PANIC = 7,
} QfStatus;

/**
 * Solver selection for [`qf_complete`].
 */
typedef enum QfMode {
  /**
   * Single nuclear-norm term on mode 0 of an order-2 tensor.
   */
  QF_MODE_MATRIX = 0,
  /**
   * One nuclear-norm term per mode.
   */
  QF_MODE_TENSOR = 1,
} QfMode;

typedef struct QfConfig QfConfig;

typedef struct QfMask QfMask;

typedef struct QfReport QfReport;

typedef struct QfTensor QfTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *qf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qf_version(void);

/**
 * All-zero tensor of the given shape.
 */
enum QfStatus qf_tensor_zeros(size_t order, const size_t *shape, struct QfTensor **out);

/**
 * Tensor copied from four planes of `prod(shape)` values each. A null `w`
 * means a zero real part (pure data); `x`, `y`, `z` are required.
 */
enum QfStatus qf_tensor_from_planes(size_t order,
                                    const size_t *shape,
                                    const double *w,
                                    const double *x,
                                    const double *y,
                                    const double *z,
                                    struct QfTensor **out);

void qf_tensor_free(struct QfTensor *t);

/**
 * Tensor order, or 0 for a null handle.
 */
size_t qf_tensor_order(const struct QfTensor *t);

/**
 * Number of quaternion entries, or 0 for a null handle.
 */
size_t qf_tensor_len(const struct QfTensor *t);

/**
 * Writes the shape into `shape`, which must hold `cap >= order` values.
 */
enum QfStatus qf_tensor_shape(const struct QfTensor *t, size_t *shape, size_t cap);

/**
 * Copies the planes out; each non-null buffer must hold `len` values and
 * `len` must equal the entry count. Null buffers are skipped.
 */
enum QfStatus qf_tensor_copy_planes(const struct QfTensor *t,
                                    double *w,
                                    double *x,
                                    double *y,
                                    double *z,
                                    size_t len);

enum QfStatus qf_tensor_load(const char *path, struct QfTensor **out);

enum QfStatus qf_tensor_save(const struct QfTensor *t, const char *path);

/**
 * `‖a - b‖_F / ‖b‖_F`.
 */
enum QfStatus qf_tensor_relative_error(const struct QfTensor *a,
                                       const struct QfTensor *b,
                                       double *out);

/**
 * Uniform random mask keeping `round(sr * prod(shape))` entries.
 */
enum QfStatus qf_mask_generate(size_t order,
                               const size_t *shape,
                               double sr,
                               uint64_t seed,
                               struct QfMask **out);

/**
 * Mask from one byte per entry (nonzero means observed) in flat order.
 */
enum QfStatus qf_mask_from_flags(size_t order,
                                 const size_t *shape,
                                 const uint8_t *flags,
                                 size_t len,
                                 struct QfMask **out);

void qf_mask_free(struct QfMask *m);

/**
 * Number of observed entries, or 0 for a null handle.
 */
size_t qf_mask_count(const struct QfMask *m);

enum QfStatus qf_mask_load(const char *path, struct QfMask **out);

enum QfStatus qf_mask_save(const struct QfMask *m, const char *path);

/**
 * Zeroes the unobserved entries of `t` into a new tensor.
 */
enum QfStatus qf_mask_apply(const struct QfMask *m,
                            const struct QfTensor *t,
                            struct QfTensor **out);

/**
 * Default configuration for `mode`; tensor defaults exist for order 3 only.
 */
enum QfStatus qf_config_default(enum QfMode mode, size_t order, struct QfConfig **out);

/**
 * Configuration with explicit per-mode weights of length `n`; other
 * settings take their defaults.
 */
enum QfStatus qf_config_new(size_t n,
                            const double *alpha,
                            const double *beta0,
                            const double *beta_max,
                            struct QfConfig **out);

void qf_config_free(struct QfConfig *c);

/**
 * Stopping rule and penalty schedule. `relative` nonzero measures the
 * iterate change against the norm of the observed data.
 */
enum QfStatus qf_config_set_schedule(struct QfConfig *c,
                                     double eta0,
                                     double eta_trigger,
                                     double epsilon,
                                     size_t max_iter,
                                     int32_t relative);

/**
 * Completes `y` (unobserved entries are ignored) on `mask`. `threads` of 0
 * uses the global pool. Either output pointer may be null if unwanted.
 */
enum QfStatus qf_complete(const struct QfTensor *y,
                          const struct QfMask *mask,
                          const struct QfConfig *cfg,
                          enum QfMode mode,
                          size_t threads,
                          struct QfTensor **out,
                          struct QfReport **report);

void qf_report_free(struct QfReport *r);

size_t qf_report_iterations(const struct QfReport *r);

/**
 * 1 if the stopping rule was met before the iteration cap, else 0.
 */
int32_t qf_report_converged(const struct QfReport *r);

double qf_report_wall_time(const struct QfReport *r);

/**
 * Copies up to `cap` per-iteration changes into `buf` and returns the full
 * trace length; pass a null `buf` to query the length.
 */
size_t qf_report_deltas(const struct QfReport *r, double *buf, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUATFILL_H */

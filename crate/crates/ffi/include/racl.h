#ifndef RACL_H
#define RACL_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RaclStatus {
  RACL_STATUS_OK = 0,
  RACL_STATUS_INVALID_INPUT = 1,
  RACL_STATUS_INDEX_OUT_OF_RANGE = 2,
  RACL_STATUS_DIMENSION_MISMATCH = 3,
  RACL_STATUS_UNSUPPORTED_SIZE = 4,
  RACL_STATUS_INVALID_CONFIG = 5,
  RACL_STATUS_DIVERGENCE = 6,
  RACL_STATUS_PARSE = 7,
  RACL_STATUS_IO = 8,
  RACL_STATUS_NULL_POINTER = 9,
  RACL_STATUS_UNDEFINED = 10,
  RACL_STATUS_PANIC = 11,
} RaclStatus;

/**
 * Opaque model handle.
 */
typedef struct RaclModel RaclModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *racl_last_error_message(void);

/**
 * Numerically stable softmax of `k` logits into `out` (length `k`).
 *
 * # Safety
 * `logits` and `out` must point to `k` valid doubles.
 */
enum RaclStatus racl_softmax(const double *logits, size_t k, double *out);

/**
 * β at epoch `t` of the cosine schedule from `beta0` down to `beta1`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RaclStatus racl_beta_at(double beta0, double beta1, size_t t_max, size_t t, double *out);

/**
 * Writes 1 to `out` when `p` lies in the credal set generated by `pi`, else 0.
 *
 * # Safety
 * `pi` and `p` must point to `k` valid doubles; `out` must be valid.
 */
enum RaclStatus racl_credal_contains(const double *pi, const double *p, size_t k, int32_t *out);

/**
 * Closest boundary point of the two-level credal set (possibility 1 on
 * classes with `pi == 1`, `alpha` elsewhere) to `p_hat`.
 *
 * # Safety
 * `p_hat`, `pi` and `out` must point to `k` valid doubles.
 */
enum RaclStatus racl_project(const double *p_hat,
                             const double *pi,
                             size_t k,
                             double alpha,
                             double *out);

/**
 * Credal loss of prediction `p_hat` for observed label `y_obs`. `inside`
 * (optional) receives 1 when the prediction already lies in the set.
 *
 * # Safety
 * `p_hat` and `alpha_per_class` must point to `k` valid doubles; `loss`
 * must be valid; `inside` may be null.
 */
enum RaclStatus racl_loss(const double *p_hat,
                          size_t k,
                          size_t y_obs,
                          double beta,
                          const double *alpha_per_class,
                          double *loss,
                          int32_t *inside);

/**
 * Credal loss and its gradient with respect to the logits.
 *
 * # Safety
 * `logits`, `alpha_per_class` and `grad` must point to `k` valid doubles;
 * `loss` must be valid.
 */
enum RaclStatus racl_loss_grad(const double *logits,
                               size_t k,
                               size_t y_obs,
                               double beta,
                               const double *alpha_per_class,
                               double *loss,
                               double *grad);

/**
 * Binary ROC AUC with tie-averaged ranks; `positive` holds 0 or 1 per
 * sample. Returns `Undefined` when one class is absent.
 *
 * # Safety
 * `scores` and `positive` must point to `n` valid elements; `out` must be valid.
 */
enum RaclStatus racl_roc_auc(const double *scores, const uint8_t *positive, size_t n, double *out);

/**
 * Loads a model JSON file written by `racl train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid. The handle
 * must be released with [`racl_model_free`].
 */
enum RaclStatus racl_model_load(const char *path, struct RaclModel **out);

/**
 * Input dimension and class count of a loaded model.
 *
 * # Safety
 * `model` must come from [`racl_model_load`]; out-pointers must be valid.
 */
enum RaclStatus racl_model_shape(const struct RaclModel *model,
                                 size_t *input_dim,
                                 size_t *num_classes);

/**
 * Class probabilities for one feature vector.
 *
 * # Safety
 * `model` must come from [`racl_model_load`]; `x` must hold `dim` doubles
 * and `out` `k` doubles.
 */
enum RaclStatus racl_model_predict_proba(const struct RaclModel *model,
                                         const double *x,
                                         size_t dim,
                                         double *out,
                                         size_t k);

/**
 * Releases a model handle; null is ignored.
 *
 * # Safety
 * `model` must come from [`racl_model_load`] and not be used afterwards.
 */
void racl_model_free(struct RaclModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RACL_H */

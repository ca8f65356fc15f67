#ifndef COVBVM_H
#define COVBVM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CovbvmStatus {
  COVBVM_STATUS_OK = 0,
  COVBVM_STATUS_NULL_POINTER = 1,
  COVBVM_STATUS_NOT_POSITIVE_DEFINITE = 2,
  COVBVM_STATUS_NO_CONVERGENCE = 3,
  COVBVM_STATUS_DIMENSION_MISMATCH = 4,
  COVBVM_STATUS_EMPTY_DATA = 5,
  COVBVM_STATUS_NON_FINITE = 6,
  COVBVM_STATUS_DEGREES_OF_FREEDOM_TOO_SMALL = 7,
  COVBVM_STATUS_BAD_INIT = 8,
  COVBVM_STATUS_NON_FINITE_LIKELIHOOD = 9,
  COVBVM_STATUS_PERTURBATION_TOO_LARGE = 10,
  COVBVM_STATUS_ZERO_EIGENGAP = 11,
  COVBVM_STATUS_SINGULAR_SAMPLE = 12,
  COVBVM_STATUS_NON_POSITIVE_VARIANCE = 13,
  COVBVM_STATUS_EMPTY_SAMPLES = 14,
  COVBVM_STATUS_ORDER_TOO_HIGH = 15,
  COVBVM_STATUS_COVARIANCE_MISMATCH = 16,
  COVBVM_STATUS_INVALID_ARGUMENT = 17,
  COVBVM_STATUS_CONFIG_PARSE = 18,
  COVBVM_STATUS_IO = 19,
  COVBVM_STATUS_INDEX_OUT_OF_RANGE = 20,
  COVBVM_STATUS_PANIC = 99,
} CovbvmStatus;

/**
 * Data matrix handle (`n` rows of length `p`).
 */
typedef struct CovbvmDataset CovbvmDataset;

/**
 * Posterior precision draws.
 */
typedef struct CovbvmDraws CovbvmDraws;

/**
 * Symmetric matrix handle.
 */
typedef struct CovbvmMatrix CovbvmMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must point to `len` writable bytes or be null.
 */
size_t covbvm_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *covbvm_version(void);

/**
 * Creates a `dim × dim` symmetric matrix from row-major `data`
 * (symmetrized as `(A + Aᵀ)/2`).
 *
 * # Safety
 * `data` must point to `dim * dim` doubles; `out` must be writable.
 */
enum CovbvmStatus covbvm_matrix_new(size_t dim, const double *data, struct CovbvmMatrix **out);

/**
 * # Safety
 * `m` must come from this library and not be freed twice; null is ignored.
 */
void covbvm_matrix_free(struct CovbvmMatrix *m);

/**
 * # Safety
 * `m` must be a valid handle; `out` must be writable.
 */
enum CovbvmStatus covbvm_matrix_dim(const struct CovbvmMatrix *m, size_t *out);

/**
 * Entry `(i, j)`, 0-based.
 *
 * # Safety
 * `m` must be a valid handle; `out` must be writable.
 */
enum CovbvmStatus covbvm_matrix_get(const struct CovbvmMatrix *m, size_t i, size_t j, double *out);

/**
 * Copies the row-major entries into `buf` (`dim * dim` doubles).
 *
 * # Safety
 * `m` must be a valid handle; `buf` must hold `len` doubles.
 */
enum CovbvmStatus covbvm_matrix_copy(const struct CovbvmMatrix *m, double *buf, size_t len);

/**
 * `log det` of a positive definite matrix.
 *
 * # Safety
 * `m` must be a valid handle; `out` must be writable.
 */
enum CovbvmStatus covbvm_matrix_log_det(const struct CovbvmMatrix *m, double *out);

/**
 * Inverse of a positive definite matrix as a new handle.
 *
 * # Safety
 * `m` must be a valid handle; `out` must be writable.
 */
enum CovbvmStatus covbvm_matrix_inverse(const struct CovbvmMatrix *m, struct CovbvmMatrix **out);

/**
 * Eigenvalues in nonincreasing order into `values` (`len ≥ dim`).
 *
 * # Safety
 * `m` must be a valid handle; `values` must hold `len` doubles.
 */
enum CovbvmStatus covbvm_matrix_eigenvalues(const struct CovbvmMatrix *m,
                                            double *values,
                                            size_t len);

/**
 * Dataset of `n` rows of length `p` from row-major `rows`.
 *
 * # Safety
 * `rows` must point to `n * p` doubles; `out` must be writable.
 */
enum CovbvmStatus covbvm_dataset_new(size_t n,
                                     size_t p,
                                     const double *rows,
                                     struct CovbvmDataset **out);

/**
 * # Safety
 * `d` must come from this library and not be freed twice; null is ignored.
 */
void covbvm_dataset_free(struct CovbvmDataset *d);

/**
 * `(1/n) Σ x xᵀ`, or about the sample mean when `centered` is nonzero.
 *
 * # Safety
 * `d` must be a valid handle; `out` must be writable.
 */
enum CovbvmStatus covbvm_sample_covariance(const struct CovbvmDataset *d,
                                           int32_t centered,
                                           struct CovbvmMatrix **out);

/**
 * Draws from the Wishart-prior posterior of the precision matrix.
 *
 * # Safety
 * `d` must be a valid handle; `out` must be writable.
 */
enum CovbvmStatus covbvm_conjugate_draws(const struct CovbvmDataset *d,
                                         size_t b,
                                         size_t n_draws,
                                         uint64_t seed,
                                         uint64_t stream,
                                         struct CovbvmDraws **out);

/**
 * # Safety
 * `d` must come from this library and not be freed twice; null is ignored.
 */
void covbvm_draws_free(struct CovbvmDraws *d);

/**
 * # Safety
 * `d` must be a valid handle; `out` must be writable.
 */
enum CovbvmStatus covbvm_draws_len(const struct CovbvmDraws *d, size_t *out);

/**
 * Copy of draw `k` (0-based) as a new matrix handle.
 *
 * # Safety
 * `d` must be a valid handle; `out` must be writable.
 */
enum CovbvmStatus covbvm_draws_get(const struct CovbvmDraws *d,
                                   size_t k,
                                   struct CovbvmMatrix **out);

/**
 * Functional value at covariance `sigma`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `sigma` a valid handle; `out` writable.
 */
enum CovbvmStatus covbvm_functional_evaluate(const char *spec,
                                             const struct CovbvmMatrix *sigma,
                                             double *out);

/**
 * Closed-form asymptotic variance of the functional at truth `sigma`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `sigma` a valid handle; `out` writable.
 */
enum CovbvmStatus covbvm_functional_variance(const char *spec,
                                             const struct CovbvmMatrix *sigma,
                                             double *out);

/**
 * `P(Z ≤ t)` for a standard normal `Z`.
 */
double covbvm_std_normal_cdf(double t);

/**
 * Kolmogorov–Smirnov distance of `samples` to the standard normal.
 *
 * # Safety
 * `samples` must point to `len` doubles; `out` must be writable.
 */
enum CovbvmStatus covbvm_ks_normal(const double *samples, size_t len, double *out);

/**
 * Order-`k` Kato term for eigenvalue `m` (1-based) of `diag(values) + delta`,
 * with `delta` expressed in the eigenbasis of the diagonal.
 *
 * # Safety
 * `values` must point to `p` doubles; `delta` a valid handle; `out` writable.
 */
enum CovbvmStatus covbvm_kato_term(const double *values,
                                   size_t p,
                                   const struct CovbvmMatrix *delta,
                                   size_t m,
                                   size_t k,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVBVM_H */

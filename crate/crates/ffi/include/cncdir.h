#ifndef CNCDIR_H
#define CNCDIR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Model families.
 */
typedef enum CncdirFamily {
  CNCDIR_FAMILY_DIRICHLET = 0,
  CNCDIR_FAMILY_KUMMER_BETA = 1,
  CNCDIR_FAMILY_NCDIR = 2,
  CNCDIR_FAMILY_CNCDIR = 3,
} CncdirFamily;

/**
 * Outcome of a call.
 */
typedef enum CncdirStatus {
  CNCDIR_STATUS_OK = 0,
  /**
   * Invalid parameters or arguments.
   */
  CNCDIR_STATUS_DOMAIN = 1,
  /**
   * A series or the optimizer did not converge.
   */
  CNCDIR_STATUS_CONVERGENCE = 2,
  /**
   * Malformed input data.
   */
  CNCDIR_STATUS_PARSE = 3,
  CNCDIR_STATUS_IO = 4,
  CNCDIR_STATUS_NULL_ARGUMENT = 5,
  /**
   * The caller's buffer is too small; the required length is reported.
   */
  CNCDIR_STATUS_BUFFER_TOO_SMALL = 6,
  CNCDIR_STATUS_PANIC = 7,
} CncdirStatus;

/**
 * A bivariate sample on the simplex.
 */
typedef struct CncdirDataset CncdirDataset;

/**
 * A finished maximum-likelihood fit.
 */
typedef struct CncdirFit CncdirFit;

/**
 * A distribution: family, parameters and series control.
 */
typedef struct CncdirModel CncdirModel;

/**
 * A seeded random source bound to one model.
 */
typedef struct CncdirSampler CncdirSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *cncdir_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *cncdir_version(void);

/**
 * Create a model. `lambda` may be null for the Dirichlet and Kummer-Beta
 * families; `delta` is read only by the Kummer-Beta family. Non-central
 * families take `n_lambda = n_alpha` non-centralities.
 */
enum CncdirStatus cncdir_model_new(enum CncdirFamily family,
                                   const double *alpha,
                                   size_t n_alpha,
                                   const double *lambda,
                                   size_t n_lambda,
                                   double delta,
                                   struct CncdirModel **out);

void cncdir_model_free(struct CncdirModel *model);

/**
 * Replace the series tolerance and term budget of a model.
 */
enum CncdirStatus cncdir_model_set_series_control(struct CncdirModel *model,
                                                  double tol,
                                                  size_t maxiter);

/**
 * Log density at the point with coordinates `x[0..dim]`.
 */
enum CncdirStatus cncdir_model_logpdf(const struct CncdirModel *model,
                                      const double *x,
                                      size_t dim,
                                      double *out);

/**
 * Mixed moment `E[X1^r1 X2^r2]` of a bivariate CNcDir or Dirichlet model.
 */
enum CncdirStatus cncdir_model_mixed_moment(const struct CncdirModel *model,
                                            uint64_t r1,
                                            uint64_t r2,
                                            double *out);

/**
 * Sampler for a Dirichlet, NcDir or CNcDir model. The sampler does not
 * borrow the model, which may be freed afterwards.
 */
enum CncdirStatus cncdir_sampler_new(const struct CncdirModel *model,
                                     uint64_t seed,
                                     struct CncdirSampler **out);

void cncdir_sampler_free(struct CncdirSampler *sampler);

/**
 * Draw `n` points into `out[0..n*dim]`, row by row.
 */
enum CncdirStatus cncdir_sampler_draw(struct CncdirSampler *sampler,
                                      size_t n,
                                      double *out,
                                      size_t out_len);

/**
 * Dataset from the coordinate arrays `x1[0..n]`, `x2[0..n]`.
 */
enum CncdirStatus cncdir_dataset_new(const double *x1,
                                     const double *x2,
                                     size_t n,
                                     struct CncdirDataset **out);

/**
 * Dataset from a two-column CSV file.
 */
enum CncdirStatus cncdir_dataset_read_csv(const char *path, struct CncdirDataset **out);

size_t cncdir_dataset_len(const struct CncdirDataset *data);

void cncdir_dataset_free(struct CncdirDataset *data);

/**
 * Fit a bivariate family. Bit `i` of `pinned_shapes` pins shape `i + 1`
 * to one. `starts` is the number of optimizer starts (0 uses the default).
 */
enum CncdirStatus cncdir_fit(enum CncdirFamily family,
                             uint32_t pinned_shapes,
                             const struct CncdirDataset *data,
                             size_t starts,
                             uint64_t seed,
                             struct CncdirFit **out);

void cncdir_fit_free(struct CncdirFit *fit);

enum CncdirStatus cncdir_fit_loglik(const struct CncdirFit *fit, double *out);

/**
 * Full parameter vector: three shapes, then `delta` or three
 * non-centralities. `out_written` receives the length even when the buffer
 * is too small.
 */
enum CncdirStatus cncdir_fit_parameters(const struct CncdirFit *fit,
                                        double *out,
                                        size_t out_len,
                                        size_t *out_written);

/**
 * The fit report as JSON. Release the string with [`cncdir_string_free`].
 */
enum CncdirStatus cncdir_fit_to_json(const struct CncdirFit *fit, char **out);

void cncdir_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CNCDIR_H */

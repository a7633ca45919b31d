/* C interface to the swar dimension-reduction library. */

#ifndef SWAR_H
#define SWAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status of a call. Mirrors the CLI exit codes: usage, data and numerical
// errors are distinguished.
typedef enum SwarStatus {
  SWAR_STATUS_OK = 0,
  SWAR_STATUS_USAGE_ERROR = 1,
  SWAR_STATUS_DATA_ERROR = 2,
  SWAR_STATUS_NUMERICAL_ERROR = 3,
  SWAR_STATUS_NULL_POINTER = 4,
  SWAR_STATUS_INVALID_STRING = 5,
  SWAR_STATUS_INTERNAL_ERROR = 99,
} SwarStatus;

// Estimator selector.
typedef enum SwarMethod {
  SWAR_METHOD_OLS = 0,
  SWAR_METHOD_SIR = 1,
  SWAR_METHOD_SWAR = 2,
  SWAR_METHOD_SWAR_W = 3,
  SWAR_METHOD_SWAR_T = 4,
} SwarMethod;

// Opaque dataset handle.
typedef struct SwarDataset SwarDataset;

// Opaque fitted-basis handle.
typedef struct SwarFit SwarFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *swar_last_error_message(void);

// Build a dataset from a row-major n-by-p predictor array and an n-vector
// response.
//
// # Safety
// `x` must point to `n * p` readable doubles, `y` to `n` readable doubles,
// and `out` must be a valid location for one pointer.
enum SwarStatus swar_dataset_new(const double *x,
                                 uintptr_t n,
                                 uintptr_t p,
                                 const double *y,
                                 struct SwarDataset **out);

// Load a dataset from a headered CSV file, splitting off the named
// response column.
//
// # Safety
// `path` and `response` must be NUL-terminated strings; `out` must be a
// valid location for one pointer.
enum SwarStatus swar_dataset_from_csv(const char *path,
                                      const char *response,
                                      struct SwarDataset **out);

// Number of observations, or 0 for a null handle.
//
// # Safety
// `dataset` must be a live handle from a constructor or null.
uintptr_t swar_dataset_rows(const struct SwarDataset *dataset);

// Number of predictors, or 0 for a null handle.
//
// # Safety
// `dataset` must be a live handle from a constructor or null.
uintptr_t swar_dataset_cols(const struct SwarDataset *dataset);

// Release a dataset handle. Null is ignored.
//
// # Safety
// `dataset` must be a handle previously returned by a constructor and not
// yet freed.
void swar_dataset_free(struct SwarDataset *dataset);

// Fit an estimator. `h` is ignored for OLS; `k` is the number of
// directions.
//
// # Safety
// `dataset` must be a live dataset handle; `out` must be a valid location
// for one pointer.
enum SwarStatus swar_fit(const struct SwarDataset *dataset,
                         enum SwarMethod method,
                         uintptr_t h,
                         uintptr_t k,
                         struct SwarFit **out);

// Release a fit handle. Null is ignored.
//
// # Safety
// `fit` must be a handle previously returned by [`swar_fit`] and not yet
// freed.
void swar_fit_free(struct SwarFit *fit);

// Predictor dimension of a fit, or 0 for a null handle.
//
// # Safety
// `fit` must be a live fit handle or null.
uintptr_t swar_fit_p(const struct SwarFit *fit);

// Number of directions of a fit, or 0 for a null handle.
//
// # Safety
// `fit` must be a live fit handle or null.
uintptr_t swar_fit_k(const struct SwarFit *fit);

// Slice count of a fit, or 0 for a null handle.
//
// # Safety
// `fit` must be a live fit handle or null.
uintptr_t swar_fit_h(const struct SwarFit *fit);

// Copy direction `j` (0-based) into `out`, a buffer of length p.
//
// # Safety
// `fit` must be a live fit handle; `out` must point to `p` writable
// doubles.
enum SwarStatus swar_fit_direction(const struct SwarFit *fit, uintptr_t j, double *out);

// Copy the eigenvalues into `out`, a buffer of length k.
//
// # Safety
// `fit` must be a live fit handle; `out` must point to `k` writable
// doubles.
enum SwarStatus swar_fit_eigenvalues(const struct SwarFit *fit, double *out);

// Copy the slice weights into `out`, a buffer of length h.
//
// # Safety
// `fit` must be a live fit handle; `out` must point to `h` writable
// doubles.
enum SwarStatus swar_fit_weights(const struct SwarFit *fit, double *out);

// Leave-one-out influence of every observation on the estimated subspace,
// written to `out` (length n). Values are nonpositive.
//
// # Safety
// `dataset` must be a live dataset handle; `out` must point to `n`
// writable doubles.
enum SwarStatus swar_sif_subspace(const struct SwarDataset *dataset,
                                  enum SwarMethod method,
                                  uintptr_t h,
                                  uintptr_t k,
                                  double *out);

// Plug-in influence of every observation on the estimated subspace under
// an existing fit, written to `out` (length n).
//
// # Safety
// `dataset` and `fit` must be live handles; `out` must point to `n`
// writable doubles.
enum SwarStatus swar_eif_subspace(const struct SwarDataset *dataset,
                                  const struct SwarFit *fit,
                                  double *out);

// Choose the slice count and dimension with the minimum mean absolute
// subspace influence over the candidate grids.
//
// # Safety
// `dataset` must be a live dataset handle; `h_candidates` and
// `k_candidates` must point to `n_h` and `n_k` readable values; `out_h`
// and `out_k` must be valid locations.
enum SwarStatus swar_select_hk(const struct SwarDataset *dataset,
                               const uintptr_t *h_candidates,
                               uintptr_t n_h,
                               const uintptr_t *k_candidates,
                               uintptr_t n_k,
                               uintptr_t *out_h,
                               uintptr_t *out_k);

// Run a simulation study described by a JSON configuration and return the
// aggregated result as a JSON string. Free the result with
// [`swar_string_free`].
//
// # Safety
// `config_json` must be a NUL-terminated string; `out_json` must be a
// valid location for one pointer.
enum SwarStatus swar_run_study_json(const char *config_json, char **out_json);

// Free a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be a pointer previously returned by [`swar_run_study_json`] and
// not yet freed.
void swar_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWAR_H */

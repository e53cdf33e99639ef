#ifndef DQC1_H
#define DQC1_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define DQC1_REGISTER_MIXED 0

#define DQC1_REGISTER_PURE 1

/**
 * Result of every exported call.
 */
typedef enum Dqc1Status {
  DQC1_STATUS_OK = 0,
  DQC1_STATUS_INVALID_INPUT = 1,
  DQC1_STATUS_DIMENSION_MISMATCH = 2,
  DQC1_STATUS_PARSE = 3,
  DQC1_STATUS_IO = 4,
  DQC1_STATUS_NULL_POINTER = 5,
  DQC1_STATUS_PANIC = 6,
} Dqc1Status;

/**
 * Opaque Gram matrix handle.
 */
typedef struct Dqc1Gram Dqc1Gram;

/**
 * Opaque trained-model handle.
 */
typedef struct Dqc1Model Dqc1Model;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *dqc1_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dqc1_version(void);

/**
 * Shots per quadrature for accuracy `epsilon` with failure probability
 * `delta` at control polarization `beta`.
 *
 * # Safety
 * `out` must be a valid pointer to a `uint64_t`.
 */
enum Dqc1Status dqc1_shots_needed(double epsilon, double delta, double beta, uint64_t *out);

/**
 * Complex kernel `Tr(ρₙ 𝒰ʳ(x) 𝒰ʳ†(x′))` for one pair of phase-scaled points.
 *
 * # Safety
 * `out_re` and `out_im` must be valid pointers to doubles.
 */
enum Dqc1Status dqc1_kernel(double x1,
                            double x2,
                            double y1,
                            double y2,
                            size_t depth_r,
                            uint32_t register_code,
                            double *out_re,
                            double *out_im);

/**
 * Exact quantum Gram matrix of `|K|` between two point sets.
 *
 * # Safety
 * `xs_a`/`xs_b` must hold `2·n_a`/`2·n_b` doubles; `out` must be writable.
 */
enum Dqc1Status dqc1_gram_quantum(const double *xs_a,
                                  size_t n_a,
                                  const double *xs_b,
                                  size_t n_b,
                                  size_t depth_r,
                                  uint32_t register_code,
                                  struct Dqc1Gram **out);

/**
 * RBF Gram matrix `exp(−γ‖x − x′‖²)`.
 *
 * # Safety
 * As for [`dqc1_gram_quantum`].
 */
enum Dqc1Status dqc1_gram_rbf(const double *xs_a,
                              size_t n_a,
                              const double *xs_b,
                              size_t n_b,
                              double gamma,
                              struct Dqc1Gram **out);

/**
 * # Safety
 * `gram` must be a live handle or null.
 */
size_t dqc1_gram_rows(const struct Dqc1Gram *gram);

/**
 * # Safety
 * `gram` must be a live handle or null.
 */
size_t dqc1_gram_cols(const struct Dqc1Gram *gram);

/**
 * Copies the row-major values into `out`, which must hold `rows·cols` doubles.
 *
 * # Safety
 * `gram` must be a live handle and `out` must hold `len` doubles.
 */
enum Dqc1Status dqc1_gram_values(const struct Dqc1Gram *gram, double *out, size_t len);

/**
 * # Safety
 * `gram` must come from this library and not be used afterwards.
 */
void dqc1_gram_free(struct Dqc1Gram *gram);

/**
 * Trains a soft-margin SVM on a square Gram matrix with labels in {+1, −1}.
 *
 * # Safety
 * `labels` must hold `n` values; `out` must be writable.
 */
enum Dqc1Status dqc1_svm_train(const struct Dqc1Gram *gram,
                               const int8_t *labels,
                               size_t n,
                               double c,
                               struct Dqc1Model **out);

/**
 * Decision values for each row of a (query × train) Gram matrix.
 *
 * # Safety
 * `out` must hold `len` doubles, `len` equal to the Gram's row count.
 */
enum Dqc1Status dqc1_svm_decision(const struct Dqc1Model *model,
                                  const struct Dqc1Gram *gram_cross,
                                  double *out,
                                  size_t len);

/**
 * Number of support vectors, or 0 for a null handle.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
size_t dqc1_svm_support_count(const struct Dqc1Model *model);

/**
 * Model as a JSON string; release it with [`dqc1_string_free`]. Null on failure.
 *
 * # Safety
 * `model` must be a live handle.
 */
char *dqc1_svm_to_json(const struct Dqc1Model *model);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void dqc1_svm_free(struct Dqc1Model *model);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void dqc1_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DQC1_H */

#ifndef KRONCOEF_H
#define KRONCOEF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KronStatus {
  KRON_STATUS_OK = 0,
  KRON_STATUS_NULL_POINTER = 1,
  KRON_STATUS_INVALID_ARGUMENT = 2,
  KRON_STATUS_UNSUPPORTED_SIZE = 3,
  KRON_STATUS_DEGENERATE = 4,
  KRON_STATUS_CONVERGENCE = 5,
  KRON_STATUS_DOMAIN = 6,
  KRON_STATUS_NO_ZERO_COEFFICIENT = 7,
  KRON_STATUS_INTEGRITY = 8,
  KRON_STATUS_VERSION_MISMATCH = 9,
  KRON_STATUS_IO = 10,
  KRON_STATUS_NOT_FOUND = 11,
  KRON_STATUS_INCONSISTENT = 12,
  KRON_STATUS_PANIC = 13,
} KronStatus;

/**
 * Opaque b-loading table.
 */
typedef struct KronBTable KronBTable;

/**
 * Opaque character table of S_n.
 */
typedef struct KronCharTable KronCharTable;

/**
 * Opaque Kronecker tensor over canonical triples.
 */
typedef struct KronTensor KronTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *kron_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kron_version(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum KronStatus kron_char_table_new(uintptr_t n, struct KronCharTable **out);

/**
 * # Safety
 * `t` must be null or a handle from [`kron_char_table_new`] not yet freed.
 */
void kron_char_table_free(struct KronCharTable *t);

/**
 * Number of partitions `p(n)`.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum KronStatus kron_char_table_size(const struct KronCharTable *t, uintptr_t *out);

/**
 * `χ_λ(ρ)` by partition indices in descending lexicographic order.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum KronStatus kron_char_table_get(const struct KronCharTable *t,
                                    uintptr_t lambda,
                                    uintptr_t rho,
                                    int64_t *out);

/**
 * # Safety
 * `chars` must be a live handle and `out` valid for writes.
 */
enum KronStatus kron_tensor_new(const struct KronCharTable *chars, struct KronTensor **out);

/**
 * # Safety
 * `t` must be null or a handle from [`kron_tensor_new`] not yet freed.
 */
void kron_tensor_free(struct KronTensor *t);

/**
 * `g(λ, μ, ν)` for any index order.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum KronStatus kron_tensor_get(const struct KronTensor *t,
                                uintptr_t i,
                                uintptr_t j,
                                uintptr_t k,
                                uint32_t *out);

/**
 * Share of ordered triples with a non-zero coefficient.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum KronStatus kron_tensor_nonzero_ratio(const struct KronTensor *t, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum KronStatus kron_btable_new(uintptr_t n, struct KronBTable **out);

/**
 * # Safety
 * `t` must be null or a handle from [`kron_btable_new`] not yet freed.
 */
void kron_btable_free(struct KronBTable *t);

/**
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum KronStatus kron_btable_size(const struct KronBTable *t, uintptr_t *out);

/**
 * b-loading of one partition.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum KronStatus kron_btable_get(const struct KronBTable *t, uintptr_t index, double *out);

/**
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum KronStatus kron_btable_b_of_triple(const struct KronBTable *t,
                                        uintptr_t i,
                                        uintptr_t j,
                                        uintptr_t k,
                                        double *out);

/**
 * Mean and standard deviation of `b(t)` over ordered triples.
 *
 * # Safety
 * `t` must be a live handle; `mean` and `std` valid for writes.
 */
enum KronStatus kron_btable_moments(const struct KronBTable *t, double *mean, double *std);

/**
 * Ordered triples with `b(t) < threshold`, and the total `p³`.
 *
 * # Safety
 * `t` must be a live handle; `count` and `total` valid for writes.
 */
enum KronStatus kron_count_below(const struct KronBTable *t,
                                 double threshold,
                                 uint64_t *count,
                                 uint64_t *total);

/**
 * Smallest `b(t)` over vanishing coefficients and its canonical triple.
 *
 * # Safety
 * Handles must be live; `value` and `triple` (3 slots) valid for writes.
 */
enum KronStatus kron_b_star(const struct KronTensor *tensor,
                            const struct KronBTable *btable,
                            double *value,
                            uintptr_t *triple);

/**
 * Ascending scan for `b★` with at most `budget` coefficient evaluations.
 * `*exact` is 1 when `*value` is `b★`, 0 when it is only a lower bound.
 *
 * # Safety
 * Handles must be live; all outputs valid for writes.
 */
enum KronStatus kron_b_star_scan(const struct KronBTable *btable,
                                 const struct KronCharTable *chars,
                                 uint64_t budget,
                                 double *value,
                                 int32_t *exact,
                                 uint64_t *evaluations);

double kron_sigma(double x);

/**
 * `σ(m − b)`; predicts non-zero when at least 1/2.
 */
double kron_f1_kan(double b, double m);

double kron_f2_logistic(double b);

/**
 * Fails with `Domain` for `b <= 0`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KronStatus kron_f3_symbolic(double b, double *out);

double kron_fixed_snn(double b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KRONCOEF_H */

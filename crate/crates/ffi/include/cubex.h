#ifndef CUBEX_H
#define CUBEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CubexStatus {
  CUBEX_STATUS_OK = 0,
  CUBEX_STATUS_NULL_POINTER = 1,
  CUBEX_STATUS_INVALID_ARGUMENT = 2,
  CUBEX_STATUS_DIMENSION_MISMATCH = 3,
  CUBEX_STATUS_RESOURCE_LIMIT = 4,
  CUBEX_STATUS_PARSE = 5,
  CUBEX_STATUS_INVALID_MEASURE = 6,
  CUBEX_STATUS_NOT_INVARIANT = 7,
  CUBEX_STATUS_IO = 8,
  CUBEX_STATUS_INTERNAL = 9,
} CubexStatus;

/**
 * A Boolean function on `F_2^n`.
 */
typedef struct CubexBoolFn CubexBoolFn;

/**
 * A finitely supported measure with exact rational weights.
 */
typedef struct CubexMeasure CubexMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failing call on this thread; empty after a
 * successful call. The pointer stays valid until the next cubex call on the
 * same thread.
 */
const char *cubex_last_error_message(void);

void cubex_string_free(char *s);

/**
 * Parses a hex truth table (highest point first) on `F_2^n`.
 */
enum CubexStatus cubex_boolfn_from_hex(uint32_t n, const char *hex, struct CubexBoolFn **result);

void cubex_boolfn_free(struct CubexBoolFn *f);

enum CubexStatus cubex_boolfn_to_hex(const struct CubexBoolFn *f, char **result);

/**
 * Algebraic degree; `-1` for the zero function.
 */
enum CubexStatus cubex_boolfn_degree(const struct CubexBoolFn *f, int32_t *result);

/**
 * Whether every `r`-face of the cube sums to zero.
 */
enum CubexStatus cubex_boolfn_omega_member(const struct CubexBoolFn *f, uint32_t r, bool *result);

/**
 * Hamming distance to the nearest function of degree at most `r`.
 */
enum CubexStatus cubex_boolfn_rm_distance(const struct CubexBoolFn *f,
                                          uint32_t r,
                                          uint64_t *result);

/**
 * Parses the `cubex-measure` text format.
 */
enum CubexStatus cubex_measure_from_text(const char *source, struct CubexMeasure **result);

enum CubexStatus cubex_measure_load(const char *path, struct CubexMeasure **result);

enum CubexStatus cubex_measure_save(const struct CubexMeasure *mu, const char *path);

enum CubexStatus cubex_measure_to_text(const struct CubexMeasure *mu, char **result);

void cubex_measure_free(struct CubexMeasure *mu);

enum CubexStatus cubex_measure_support_size(const struct CubexMeasure *mu, size_t *result);

/**
 * Whether the measure is invariant under every isometry of the cube.
 */
enum CubexStatus cubex_measure_is_invariant(const struct CubexMeasure *mu, bool *result);

/**
 * The sparse-hyperplane measure on `F_2^n` with density `p` given as `"num/den"`.
 */
enum CubexStatus cubex_hyperplane_measure(uint32_t n, const char *p, struct CubexMeasure **result);

/**
 * The d-bar distance between two invariant measures, as `"num/den"`.
 */
enum CubexStatus cubex_dbar(const struct CubexMeasure *mu,
                            const struct CubexMeasure *nu,
                            char **result);

/**
 * Probability that `x_1 ⋯ x_d` restricted to a uniform random `j`-face of
 * `F_2^n` has degree at most `r`, as `"num/den"`.
 */
enum CubexStatus cubex_exact_pass_probability(uint32_t n,
                                              uint32_t d,
                                              uint32_t j,
                                              uint32_t r,
                                              char **result);

/**
 * Exhaustive DMT fraction for the `k`-subsets of `{1..n}` with `I = {i}`
 * and `J = {j}`, each given as `k` points from `1..=n`. Returns `"num/den"`.
 */
enum CubexStatus cubex_dmt_fraction_hypergraph(uint32_t n,
                                               uint32_t k,
                                               const uint32_t *i,
                                               size_t i_len,
                                               const uint32_t *j,
                                               size_t j_len,
                                               char **result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CUBEX_H */

#ifndef BELLCHECK_H
#define BELLCHECK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BcStatus {
  BC_STATUS_OK = 0,
  BC_STATUS_NULL_POINTER = 1,
  BC_STATUS_INVALID_ARGUMENT = 2,
  BC_STATUS_PARSE = 3,
  BC_STATUS_SHAPE = 4,
  BC_STATUS_RANGE = 5,
  BC_STATUS_NUMERICAL = 6,
  BC_STATUS_IO = 7,
  BC_STATUS_PANIC = 8,
} BcStatus;

/**
 * Parsed gate-list circuit.
 */
typedef struct BcCircuit BcCircuit;

/**
 * Dense unitary matrix.
 */
typedef struct BcUnitary BcUnitary;

typedef struct BcBounds {
  double lower;
  double upper;
} BcBounds;

typedef struct BcEstimate {
  uint64_t shots;
  uint64_t seed;
  /**
   * Sample mean of the normalized Bell value, in [0, 1] up to noise.
   */
  double normalized;
  double bell_value;
  double distance;
} BcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next `bc_*` call on the same thread.
 */
const char *bc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bc_version(void);

/**
 * Parses circuit text (`qubits n` header followed by one gate per line).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum BcStatus bc_circuit_parse(const char *text, struct BcCircuit **out);

/**
 * Reads and parses a circuit file; errors carry the path and line.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
enum BcStatus bc_circuit_from_file(const char *path, struct BcCircuit **out);

/**
 * # Safety
 * `c` must be NULL or a handle from `bc_circuit_parse` / `bc_circuit_from_file` not yet freed.
 */
void bc_circuit_free(struct BcCircuit *c);

/**
 * Number of qubits, or 0 for NULL.
 *
 * # Safety
 * `c` must be NULL or a live circuit handle.
 */
size_t bc_circuit_n_qubits(const struct BcCircuit *c);

/**
 * # Safety
 * `c` must be a live circuit handle; `out` must be writable.
 */
enum BcStatus bc_circuit_unitary(const struct BcCircuit *c, struct BcUnitary **out);

/**
 * Builds a unitary from `dim * dim` real entries in row-major order.
 *
 * # Safety
 * `data` must point to `dim * dim` readable doubles; `out` must be writable.
 */
enum BcStatus bc_unitary_from_real(size_t dim, const double *data, struct BcUnitary **out);

/**
 * Haar-random real orthogonal matrix drawn from stream `stream` of `seed`.
 *
 * # Safety
 * `out` must be writable.
 */
enum BcStatus bc_unitary_random_orthogonal(size_t dim,
                                           uint64_t seed,
                                           uint64_t stream,
                                           struct BcUnitary **out);

/**
 * The doubled `2n`-qubit circuit whose Bell value determines the distance exactly.
 *
 * # Safety
 * `u` must be a live unitary handle; `out` must be writable.
 */
enum BcStatus bc_unitary_embed_double(const struct BcUnitary *u, struct BcUnitary **out);

/**
 * Matrix dimension, or 0 for NULL.
 *
 * # Safety
 * `u` must be NULL or a live unitary handle.
 */
size_t bc_unitary_dim(const struct BcUnitary *u);

/**
 * Copies entry `(row, col)` into `re` / `im`.
 *
 * # Safety
 * `u` must be a live unitary handle; `re` and `im` must be writable.
 */
enum BcStatus bc_unitary_get(const struct BcUnitary *u,
                             size_t row,
                             size_t col,
                             double *re,
                             double *im);

/**
 * # Safety
 * `u` must be NULL or a unitary handle not yet freed.
 */
void bc_unitary_free(struct BcUnitary *u);

/**
 * `D(U1, U2) = sqrt(1 - |Tr(U1^T U2) / d|^2)`.
 *
 * # Safety
 * `u1`, `u2` must be live unitary handles; `out` must be writable.
 */
enum BcStatus bc_circuit_distance(const struct BcUnitary *u1,
                                  const struct BcUnitary *u2,
                                  double *out);

/**
 * Exact Bell value of `(U1 ⊗ U2)|Φ_d>` with `m` settings.
 *
 * # Safety
 * `u1`, `u2` must be live unitary handles; `out` must be writable.
 */
enum BcStatus bc_bell_value(const struct BcUnitary *u1,
                            const struct BcUnitary *u2,
                            size_t m,
                            double *out);

/**
 * Two-sided distance bounds implied by a Bell value on a plain pair.
 *
 * # Safety
 * `out` must be writable.
 */
enum BcStatus bc_distance_bounds(double value, size_t d, size_t m, struct BcBounds *out);

/**
 * Exact distance from a Bell value measured on doubled circuits (`d = 4^n`).
 *
 * # Safety
 * `out` must be writable.
 */
enum BcStatus bc_distance_from_embedded_value(double value, size_t d, size_t m, double *out);

/**
 * Shots needed to estimate the normalized Bell value within `epsilon` with
 * probability at least `1 - delta`.
 *
 * # Safety
 * `out` must be writable.
 */
enum BcStatus bc_plan_shots(double epsilon, double delta, uint64_t *out);

/**
 * Finite-shot estimate of `D(U1, U2)` through the doubled circuits. Replays
 * exactly for a given `seed`.
 *
 * # Safety
 * `u1`, `u2` must be live unitary handles; `out` must be writable.
 */
enum BcStatus bc_estimate_distance(const struct BcUnitary *u1,
                                   const struct BcUnitary *u2,
                                   size_t m,
                                   uint64_t shots,
                                   uint64_t seed,
                                   struct BcEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELLCHECK_H */

#ifndef HQSIM_H
#define HQSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HqStatus {
  HQ_STATUS_OK = 0,
  HQ_STATUS_NULL_ARGUMENT = 1,
  HQ_STATUS_INVALID_ARGUMENT = 2,
  HQ_STATUS_PARSE_ERROR = 3,
  HQ_STATUS_RESOURCE_LIMIT = 4,
  HQ_STATUS_INTERNAL = 5,
} HqStatus;

typedef struct HqCircuit HqCircuit;

typedef struct HqSimulator HqSimulator;

/**
 * Exact amplitude `numerator / 2^exponent` with a 128-bit numerator split
 * into its high (signed) and low words, plus the nearest double.
 */
typedef struct HqAmplitude {
  int64_t numerator_hi;
  uint64_t numerator_lo;
  uint32_t exponent;
  double value;
} HqAmplitude;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *hq_last_error_message(void);

/**
 * Generate a circuit with the default gate density.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum HqStatus hq_circuit_generate(uint32_t k,
                                  uint64_t seed,
                                  size_t extra_layers,
                                  struct HqCircuit **out);

/**
 * Parse a JSON circuit document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum HqStatus hq_circuit_from_json(const char *json, struct HqCircuit **out);

/**
 * Serialize to JSON; free the result with [`hq_string_free`].
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum HqStatus hq_circuit_to_json(const struct HqCircuit *circuit, char **out);

/**
 * # Safety
 * `s` must come from this library, or be null.
 */
void hq_string_free(char *s);

/**
 * Qubit count, or 0 for a null handle.
 *
 * # Safety
 * `circuit` must be a live handle or null.
 */
size_t hq_circuit_num_qubits(const struct HqCircuit *circuit);

/**
 * # Safety
 * `circuit` must come from this library, or be null; it is invalid after.
 */
void hq_circuit_free(struct HqCircuit *circuit);

/**
 * Preprocess a circuit for amplitude queries. The simulator starts
 * single-threaded.
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum HqStatus hq_simulator_new(const struct HqCircuit *circuit, struct HqSimulator **out);

/**
 * # Safety
 * `sim` must be a live handle.
 */
enum HqStatus hq_simulator_set_threads(struct HqSimulator *sim, size_t threads);

/**
 * # Safety
 * `sim` must come from this library, or be null; it is invalid after.
 */
void hq_simulator_free(struct HqSimulator *sim);

/**
 * Exact amplitude `<y|C|0>`.
 *
 * # Safety
 * `sim` must be a live handle, `outcome` must point at `len` bytes and
 * `out` must be writable.
 */
enum HqStatus hq_amplitude(const struct HqSimulator *sim,
                           const uint8_t *outcome,
                           size_t len,
                           struct HqAmplitude *out);

/**
 * Draw `count` samples into `out`, `n` bytes per sample back to back.
 *
 * # Safety
 * `circuit` must be a live handle and `out` must point at `out_len`
 * writable bytes.
 */
enum HqStatus hq_sample(const struct HqCircuit *circuit,
                        uint64_t seed,
                        size_t count,
                        uint8_t *out,
                        size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HQSIM_H */

#ifndef NLIMSIM_H
#define NLIMSIM_H

/* Generated by cbindgen from nlimsim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * ABI revision; bumped on any signature or semantic change.
 */
#define NLIM_ABI_VERSION 1

/**
 * Status code returned by every fallible entry point.
 */
typedef enum NlimStatus {
  NLIM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NLIM_STATUS_NULL_ARGUMENT = 1,
  /**
   * Argument outside its documented domain (bad name, bad range).
   */
  NLIM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Valid request for a configuration this build does not support
   * (unknown activation, resolution or weight precision out of range).
   */
  NLIM_STATUS_UNSUPPORTED = 3,
  /**
   * Physically or structurally impossible request, e.g. a ramp that
   * does not fit the converter row budget.
   */
  NLIM_STATUS_INFEASIBLE = 4,
  /**
   * Output buffer shorter than the data to be written.
   */
  NLIM_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Unexpected internal failure (a bug; never part of normal flow).
   */
  NLIM_STATUS_INTERNAL = 6,
} NlimStatus;

/**
 * Opaque handle: one built ramp table plus the electrical config it was
 * built against. Only pointers to it cross the boundary.
 */
typedef struct NlimTable NlimTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI revision of this library.
 */
uint32_t nlim_abi_version(void);

/**
 * Static, nul-terminated name for a status code.
 */
const char *nlim_status_name(enum NlimStatus status);

/**
 * Build the ramp table for a named activation under the reference
 * electrical config.
 *
 * `activation`: sigmoid, tanh, elu, selu, softsign, softplus or linear.
 * `mode`: pwm or mcl. On success `*out` owns the table; release it with
 * [`nlim_table_free`].
 */
enum NlimStatus nlim_table_build(const char *activation,
                                 uint32_t n_bits,
                                 const char *mode,
                                 struct NlimTable **out);

/**
 * Release a table handle. Null is a no-op.
 */
void nlim_table_free(struct NlimTable *table);

/**
 * Ramp step count (2^n - 2); 0 for a null handle.
 */
uint32_t nlim_table_step_count(const struct NlimTable *table);

/**
 * Replica cells the ramp occupies; 0 for a null handle.
 */
uint32_t nlim_table_total_cells(const struct NlimTable *table);

/**
 * Ramp-phase clock cycles; 0 for a null handle.
 */
uint32_t nlim_table_total_cycles(const struct NlimTable *table);

/**
 * Largest output code (2^n - 2); 0 for a null handle.
 */
uint32_t nlim_table_max_code(const struct NlimTable *table);

/**
 * Code a zero MAC converts to after calibration; 0 for a null handle.
 */
uint32_t nlim_table_midcode(const struct NlimTable *table);

/**
 * One ramp LSB in activation input units; NaN for a null handle.
 */
double nlim_table_lsb(const struct NlimTable *table);

/**
 * Initial ramp offset in step units; NaN for a null handle.
 */
double nlim_table_anchor_units(const struct NlimTable *table);

/**
 * Copy the integer step weights into `steps_out` (capacity `cap`).
 * `written` receives the step count when non-null.
 */
enum NlimStatus nlim_table_steps(const struct NlimTable *table,
                                 uint32_t *steps_out,
                                 size_t cap,
                                 size_t *written);

/**
 * Convert a MAC value in step units through the ideal converter.
 * `saturated_out` (nullable) receives 1 when the input sat past either
 * end of the ramp span.
 */
enum NlimStatus nlim_table_convert_units(const struct NlimTable *table,
                                         double mac_units,
                                         uint32_t *code_out,
                                         int32_t *saturated_out);

/**
 * Convert a MAC voltage (volts) through the ideal converter under the
 * handle's electrical config.
 */
enum NlimStatus nlim_table_convert_volts(const struct NlimTable *table,
                                         double v_mac,
                                         uint32_t *code_out);

/**
 * Reconstructed activation output for a code (clamped to the code
 * range); NaN for a null handle.
 */
double nlim_table_decode_output(const struct NlimTable *table, uint32_t code);

/**
 * Cells one weight occupies at the given precision; 0 when the
 * precision is unsupported.
 */
uint32_t nlim_cells_per_weight(uint32_t weight_bits);

/**
 * Spread a signed weight level over ternary cells (scheme order,
 * descending magnitude). `cells_out` needs
 * [`nlim_cells_per_weight`] entries; `written` (nullable) receives the
 * cell count.
 */
enum NlimStatus nlim_encode_weight(uint32_t weight_bits,
                                   int32_t level,
                                   int8_t *cells_out,
                                   size_t cap,
                                   size_t *written);

/**
 * Recover the signed weight level from its cell pattern.
 */
enum NlimStatus nlim_decode_weight(uint32_t weight_bits,
                                   const int8_t *cells,
                                   size_t len,
                                   int32_t *level_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLIMSIM_H */

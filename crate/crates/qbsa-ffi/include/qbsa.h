/* C interface to the qbsa block-skewed ALU model. */

#ifndef QBSA_H
#define QBSA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * ALU operation selector.
 */
typedef enum QbsaOpcode {
  QbsaOpcode_Add = 0,
  QbsaOpcode_Sub = 1,
  QbsaOpcode_Slt = 2,
  QbsaOpcode_Eq = 3,
  QbsaOpcode_And = 4,
  QbsaOpcode_Or = 5,
  QbsaOpcode_Xor = 6,
  QbsaOpcode_Nor = 7,
} QbsaOpcode;

/**
 * Processor timing profile selector for the IPC model.
 */
typedef enum QbsaProfile {
  QbsaProfile_Qbsp = 0,
  QbsaProfile_Lfp32 = 1,
  QbsaProfile_Bsp4 = 2,
} QbsaProfile;

/**
 * Result of every FFI call.
 */
typedef enum QbsaStatus {
  QbsaStatus_Ok = 0,
  QbsaStatus_NullPointer = 1,
  QbsaStatus_InvalidArgument = 2,
  QbsaStatus_ParseError = 3,
  /**
   * A verification run found mismatches.
   */
  QbsaStatus_CheckFailed = 4,
  QbsaStatus_Internal = 5,
} QbsaStatus;

/**
 * Opaque handle to a parsed instruction trace.
 */
typedef struct QbsaTrace QbsaTrace;

/**
 * Opaque handle to the generated 32-bit unit.
 */
typedef struct QbsaUnit QbsaUnit;

/**
 * Timing summary of the generated unit.
 */
typedef struct QbsaTiming {
  uint32_t latency;
  uint32_t ii_dep;
  uint32_t ii_indep;
  double ratio_32lfa;
  double ratio_4bsa;
  uint32_t per_block_cycles[8];
} QbsaTiming;

/**
 * IPC estimate for one trace under one profile.
 */
typedef struct QbsaIpcResult {
  uint64_t total_instructions;
  uint64_t total_nops;
  double ipc;
} QbsaIpcResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Generate the 32-bit block-skewed unit.
 *
 * # Safety
 * `out` must be a valid pointer; the returned handle must be released with
 * [`qbsa_unit_free`].
 */
enum QbsaStatus qbsa_unit_new(struct QbsaUnit **out);

/**
 * Reconstruct a unit from netlist JSON (see [`qbsa_unit_to_json`]).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` as for [`qbsa_unit_new`].
 */
enum QbsaStatus qbsa_unit_from_json(const char *json, struct QbsaUnit **out);

/**
 * Release a unit handle. A null pointer is ignored.
 *
 * # Safety
 * `unit` must be null or a pointer from `qbsa_unit_new`/`qbsa_unit_from_json`
 * that has not been freed yet.
 */
void qbsa_unit_free(struct QbsaUnit *unit);

/**
 * Number of cells in the unit's netlist.
 *
 * # Safety
 * `unit` must be a live handle; `out` must be valid.
 */
enum QbsaStatus qbsa_unit_cell_count(const struct QbsaUnit *unit, uint64_t *out);

/**
 * Serialize the unit's netlist to JSON. Free the string with
 * [`qbsa_string_free`].
 *
 * # Safety
 * `unit` must be a live handle; `out` must be valid.
 */
enum QbsaStatus qbsa_unit_to_json(const struct QbsaUnit *unit, char **out);

/**
 * Release a string returned by this library. A null pointer is ignored.
 *
 * # Safety
 * `s` must be null or a pointer previously returned by this library.
 */
void qbsa_string_free(char *s);

/**
 * Measure the unit's timing by simulation probes.
 *
 * # Safety
 * `unit` must be a live handle; `out` must be valid.
 */
enum QbsaStatus qbsa_unit_timing(const struct QbsaUnit *unit, struct QbsaTiming *out);

/**
 * Run the randomized functional check: `vectors_per_op` seeded vectors per
 * operation against the reference semantics. Writes the mismatch count and
 * returns `CheckFailed` when it is nonzero.
 *
 * # Safety
 * `unit` must be a live handle; `out_mismatches` must be valid.
 */
enum QbsaStatus qbsa_unit_check(const struct QbsaUnit *unit,
                                uint64_t vectors_per_op,
                                uint64_t seed,
                                uint64_t *out_mismatches);

/**
 * Reference 32-bit semantics of one operation.
 *
 * # Safety
 * `out_s` and `out_carry` must be valid pointers.
 */
enum QbsaStatus qbsa_alu_exec(enum QbsaOpcode op,
                              uint32_t a,
                              uint32_t b,
                              uint32_t *out_s,
                              uint8_t *out_carry);

/**
 * Parse a canonical-format trace. Free with [`qbsa_trace_free`].
 *
 * # Safety
 * `name` and `text` must be NUL-terminated strings; `out` must be valid.
 */
enum QbsaStatus qbsa_trace_parse_canonical(const char *name,
                                           const char *text,
                                           struct QbsaTrace **out);

/**
 * Parse a Spike commit log. Unparseable lines are skipped; a log with no
 * instructions is a parse error.
 *
 * # Safety
 * As for [`qbsa_trace_parse_canonical`].
 */
enum QbsaStatus qbsa_trace_parse_spike(const char *name, const char *text, struct QbsaTrace **out);

/**
 * Release a trace handle. A null pointer is ignored.
 *
 * # Safety
 * `trace` must be null or an unfreed pointer from a parse function.
 */
void qbsa_trace_free(struct QbsaTrace *trace);

/**
 * Number of instructions in a trace.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be valid.
 */
enum QbsaStatus qbsa_trace_len(const struct QbsaTrace *trace, uint64_t *out);

/**
 * Estimate IPC of a trace under a profile and non-ALU latency.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be valid.
 */
enum QbsaStatus qbsa_ipc_estimate(const struct QbsaTrace *trace,
                                  enum QbsaProfile profile,
                                  uint32_t non_alu_latency,
                                  struct QbsaIpcResult *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QBSA_H */

#ifndef CCSIM_H
#define CCSIM_H

#pragma once

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CcsimStatus {
  CCSIM_STATUS_OK = 0,
  CCSIM_STATUS_NULL_ARGUMENT = 1,
  CCSIM_STATUS_INVALID_UTF8 = 2,
  CCSIM_STATUS_INVALID_SCENARIO = 3,
  CCSIM_STATUS_RUN_FAILED = 4,
  /**
   * The run hit its round cap; a trace is still returned.
   */
  CCSIM_STATUS_NON_TERMINATION = 5,
  CCSIM_STATUS_OUT_OF_RANGE = 6,
  CCSIM_STATUS_INVALID_TRACE = 7,
  CCSIM_STATUS_PANIC = 8,
} CcsimStatus;

/**
 * Opaque scenario handle.
 */
typedef struct CcsimScenario CcsimScenario;

/**
 * Opaque trace handle.
 */
typedef struct CcsimTrace CcsimTrace;

typedef struct CcsimDecision {
  bool decided;
  uint32_t value;
  uint32_t time;
  bool faulty;
} CcsimDecision;

typedef struct CcsimBits {
  uint64_t bits_correct;
  uint64_t bits_total;
  uint64_t layer_bits_correct;
  uint64_t layer_bits_total;
} CcsimBits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread. Valid until the next call
 * into this library from the same thread; never null.
 */
const char *ccsim_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ccsim_version(void);

/**
 * Parses and validates a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum CcsimStatus ccsim_scenario_parse(const char *toml, struct CcsimScenario **out);

/**
 * # Safety
 * `scenario` must be null or a handle from [`ccsim_scenario_parse`] not yet freed.
 */
void ccsim_scenario_free(struct CcsimScenario *scenario);

/**
 * Runs a scenario. On [`CcsimStatus::NonTermination`] the partial trace is
 * still written to `out`.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum CcsimStatus ccsim_run(const struct CcsimScenario *scenario, struct CcsimTrace **out);

/**
 * # Safety
 * `trace` must be null or a live trace handle.
 */
void ccsim_trace_free(struct CcsimTrace *trace);

/**
 * Serializes a trace to its line-delimited text form. Free the result
 * with [`ccsim_string_free`].
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
enum CcsimStatus ccsim_trace_serialize(const struct CcsimTrace *trace, char **out);

/**
 * Parses a serialized trace.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CcsimStatus ccsim_trace_parse(const char *text, struct CcsimTrace **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ccsim_string_free(char *s);

/**
 * Number of processes in the traced scenario, 0 for a null handle.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
size_t ccsim_trace_process_count(const struct CcsimTrace *trace);

/**
 * Decision of process `pid`.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
enum CcsimStatus ccsim_trace_decision(const struct CcsimTrace *trace,
                                      size_t pid,
                                      struct CcsimDecision *out);

/**
 * Bit counters of a trace.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
enum CcsimStatus ccsim_trace_bits(const struct CcsimTrace *trace, struct CcsimBits *out);

/**
 * Applies the consensus, silent-broadcast and budget checkers. Writes the
 * number of verdicts and of failed verdicts; the first failure's text is
 * left in [`ccsim_last_error`].
 *
 * # Safety
 * `trace` must be a live handle; both outputs must be writable.
 */
enum CcsimStatus ccsim_trace_check(const struct CcsimTrace *trace,
                                   uint32_t *verdicts,
                                   uint32_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCSIM_H */

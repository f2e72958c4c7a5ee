#ifndef DECISION_H
#define DECISION_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call. `DECISION_STATUS_OK` is zero.
 */
typedef enum DecisionStatus {
  DECISION_STATUS_OK = 0,
  DECISION_STATUS_NULL_POINTER = 1,
  DECISION_STATUS_INVALID_UTF8 = 2,
  DECISION_STATUS_PANIC = 3,
  DECISION_STATUS_INVALID_JSON = 4,
  DECISION_STATUS_MALFORMED_RELATION = 10,
  DECISION_STATUS_CAP_EXCEEDED = 11,
  DECISION_STATUS_CYCLIC_STRICT_PART = 12,
  DECISION_STATUS_NO_DECISION_PROBLEM = 20,
  DECISION_STATUS_MISSING_NORMS = 21,
  DECISION_STATUS_NOT_ENUMERABLE = 22,
  DECISION_STATUS_EVALUATION_FAILURE = 23,
  DECISION_STATUS_NO_DECOMPOSITION = 24,
  DECISION_STATUS_NOT_AGGREGABLE = 25,
  DECISION_STATUS_INVALID_FORMULATION = 26,
  DECISION_STATUS_EXPRESSION = 27,
  DECISION_STATUS_UNKNOWN_REFERENCE = 30,
  DECISION_STATUS_INCONSISTENT_STATEMENTS = 31,
  DECISION_STATUS_DEPENDENT_DIMENSIONS = 32,
  DECISION_STATUS_CONFLICTING_IMPORTANCE = 33,
  DECISION_STATUS_INTRANSITIVE_SWAPS = 34,
  DECISION_STATUS_INCOMPLETE_ELICITATION = 35,
  DECISION_STATUS_INCONCLUSIVE = 36,
  DECISION_STATUS_NO_ADMISSIBLE_ARCHETYPE = 40,
  DECISION_STATUS_CARRIER_MISMATCH = 41,
  DECISION_STATUS_NOT_COMMENSURABLE = 42,
  DECISION_STATUS_NOT_TOTAL_IMPORTANCE = 43,
  DECISION_STATUS_NOT_REPRESENTABLE = 44,
  DECISION_STATUS_UNCONFIGURED_NODE = 45,
  DECISION_STATUS_INVALID_ARGUMENT = 46,
  DECISION_STATUS_MALFORMED_NORMS = 50,
  DECISION_STATUS_AMBIGUOUS_ASSIGNMENT = 51,
  DECISION_STATUS_BAD_K = 52,
  DECISION_STATUS_INFEASIBLE = 53,
  DECISION_STATUS_INVALID_FIXTURE = 54,
  DECISION_STATUS_PROTOCOL_VIOLATION = 60,
  DECISION_STATUS_UNSUPPORTED_STATEMENT = 61,
  DECISION_STATUS_UNSUPPORTED_VERSION = 70,
  DECISION_STATUS_PARSE_ERROR = 71,
  DECISION_STATUS_IO = 72,
  DECISION_STATUS_STARTUP_ERROR = 73,
} DecisionStatus;

/**
 * Elicitation state as reported by [`decision_session_status`].
 */
typedef enum DecisionSessionState {
  DECISION_SESSION_STATE_RUNNING = 0,
  DECISION_SESSION_STATE_SATISFIED = 1,
  DECISION_SESSION_STATE_EXHAUSTED = 2,
} DecisionSessionState;

/**
 * A loaded model document.
 */
typedef struct DecisionModel DecisionModel;

/**
 * An elicitation session.
 */
typedef struct DecisionSession DecisionSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null after a
 * success. The pointer stays valid until the next call on the same thread.
 */
const char *decision_last_error(void);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void decision_string_free(char *s);

/**
 * Library version as a static string; do not free.
 */
const char *decision_version(void);

/**
 * Parses a model document from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a writable pointer slot.
 */
enum DecisionStatus decision_model_from_json(const char *json, struct DecisionModel **out);

/**
 * Loads a model document from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a writable pointer slot.
 */
enum DecisionStatus decision_model_load(const char *path, struct DecisionModel **out);

/**
 * Writes a model document to a file, replacing it atomically.
 *
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum DecisionStatus decision_model_save(const struct DecisionModel *model, const char *path);

/**
 * Serializes a model as canonical JSON into a new string.
 *
 * # Safety
 * `model` must be a live handle; `out` a writable pointer slot.
 */
enum DecisionStatus decision_model_to_json(const struct DecisionModel *model, char **out);

/**
 * Solves a model and writes the outcome as JSON into a new string.
 *
 * # Safety
 * `model` must be a live handle; `out` a writable pointer slot.
 */
enum DecisionStatus decision_model_solve(const struct DecisionModel *model,
                                         uint64_t seed,
                                         char **out);

/**
 * # Safety
 * `model` must be null or a handle that is not used afterwards.
 */
void decision_model_free(struct DecisionModel *model);

/**
 * Solves a covering instance given as a 0/1 matrix, one row per line.
 * `exact` selects branch-and-bound over the greedy heuristic.
 *
 * # Safety
 * `matrix` must be a NUL-terminated string; `out` a writable pointer slot.
 */
enum DecisionStatus decision_covering_solve(const char *matrix, bool exact, char **out);

/**
 * Starts a session from a seed attribute and a problem statement, both as
 * JSON. A `max_iter` of zero keeps the default budget.
 *
 * # Safety
 * Both strings must be NUL-terminated; `out` a writable pointer slot.
 */
enum DecisionStatus decision_session_new(const char *seed_attribute_json,
                                         const char *statement_json,
                                         uint32_t max_iter,
                                         uint64_t seed,
                                         struct DecisionSession **out);

/**
 * Restores a session from its JSON form.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` a writable pointer slot.
 */
enum DecisionStatus decision_session_from_json(const char *json, struct DecisionSession **out);

/**
 * The full session state as JSON.
 *
 * # Safety
 * `session` must be a live handle; `out` a writable pointer slot.
 */
enum DecisionStatus decision_session_to_json(const struct DecisionSession *session, char **out);

/**
 * The next query awaiting an answer as JSON, or `null` once finished.
 *
 * # Safety
 * `session` must be a live handle; `out` a writable pointer slot.
 */
enum DecisionStatus decision_session_pending(const struct DecisionSession *session, char **out);

/**
 * Applies one JSON-encoded answer. On failure the session is unchanged.
 *
 * # Safety
 * `session` must be a live handle; `answer_json` NUL-terminated.
 */
enum DecisionStatus decision_session_answer(struct DecisionSession *session,
                                            const char *answer_json);

/**
 * # Safety
 * `session` must be a live handle; `out` a writable slot.
 */
enum DecisionStatus decision_session_status(const struct DecisionSession *session,
                                            enum DecisionSessionState *out);

/**
 * The latest partition shown to the client as JSON, or `null`.
 *
 * # Safety
 * `session` must be a live handle; `out` a writable pointer slot.
 */
enum DecisionStatus decision_session_partition(const struct DecisionSession *session, char **out);

/**
 * # Safety
 * `session` must be null or a handle that is not used afterwards.
 */
void decision_session_free(struct DecisionSession *session);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DECISION_H */

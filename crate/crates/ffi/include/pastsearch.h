/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

/*
 * C interface to the pastsearch engine.
 *
 * - Every fallible function returns a PsStatus. On anything but
 *   PS_STATUS_OK, ps_last_error_message() describes the failure.
 * - Results are UTF-8 JSON strings written to *out_json. The caller owns
 *   them and releases them with ps_string_free.
 * - String arguments are NUL-terminated UTF-8 and must not be NULL.
 *   JSON request bodies have the same shape as the HTTP API.
 * - A PsEngine may be shared between threads.
 */

#ifndef PASTSEARCH_H
#define PASTSEARCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PsStatus {
  PS_STATUS_OK = 0,
  // A NULL pointer, invalid UTF-8, malformed JSON or a rejected value.
  PS_STATUS_INVALID_ARGUMENT = 1,
  // Unknown session, category, target or fragment.
  PS_STATUS_NOT_FOUND = 2,
  // The fragment is not in the session's current result set.
  PS_STATUS_CONFLICT = 3,
  // Config, graph or corpus could not be loaded.
  PS_STATUS_STARTUP_FAILED = 4,
  // I/O failure or a corrupt session file.
  PS_STATUS_INTERNAL = 5,
  // A panic was caught at the boundary.
  PS_STATUS_PANIC = 6,
} PsStatus;

// Opaque engine handle.
typedef struct PsEngine PsEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads the config file and everything it names. On success `*out` holds
// a handle to release with `ps_engine_free`.
//
// # Safety
// `config_path` is a NUL-terminated string; `out` is valid for writes.
enum PsStatus ps_engine_open(const char *config_path, struct PsEngine **out);

// Releases an engine. NULL is ignored.
//
// # Safety
// `engine` is NULL or a handle from `ps_engine_open` not yet freed.
void ps_engine_free(struct PsEngine *engine);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` is NULL or a string from this library not yet freed.
void ps_string_free(char *s);

// Message for the last failed call on this thread; empty after a
// success. Valid until the next call on the same thread.
const char *ps_last_error_message(void);

// Category typeahead. `k == 0` uses the default of 10.
//
// # Safety
// Pointers as in the conventions at the top of this header.
enum PsStatus ps_category_search(const struct PsEngine *engine,
                                 const char *query,
                                 size_t k,
                                 char **out_json);

// Creates a session from `{motivation, period, roots, max_depth?}`.
//
// # Safety
// Pointers as in the conventions at the top of this header.
enum PsStatus ps_session_create(const struct PsEngine *engine,
                                const char *request_json,
                                char **out_json);

// # Safety
// Pointers as in the conventions at the top of this header.
enum PsStatus ps_session_assessment(const struct PsEngine *engine,
                                    const char *session_id,
                                    char **out_json);

// Records `{action, target_kind, target}`.
//
// # Safety
// Pointers as in the conventions at the top of this header.
enum PsStatus ps_session_decide(const struct PsEngine *engine,
                                const char *session_id,
                                const char *decision_json,
                                char **out_json);

// One page of results. `page` is 1-based; 0 for either argument uses the
// default.
//
// # Safety
// Pointers as in the conventions at the top of this header.
enum PsStatus ps_session_results(const struct PsEngine *engine,
                                 const char *session_id,
                                 size_t page,
                                 size_t page_size,
                                 char **out_json);

// Counts grouped by `year` or `meta:<key>`.
//
// # Safety
// Pointers as in the conventions at the top of this header.
enum PsStatus ps_session_analytics(const struct PsEngine *engine,
                                   const char *session_id,
                                   const char *group_by,
                                   char **out_json);

// Asserts that a sentence of the result set is relevant.
//
// # Safety
// Pointers as in the conventions at the top of this header.
enum PsStatus ps_session_assert(const struct PsEngine *engine,
                                const char *session_id,
                                const char *doc_id,
                                size_t sentence_index,
                                char **out_json);

// The session's export document, byte-identical to the session file.
//
// # Safety
// Pointers as in the conventions at the top of this header.
enum PsStatus ps_session_export(const struct PsEngine *engine,
                                const char *session_id,
                                char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PASTSEARCH_H */

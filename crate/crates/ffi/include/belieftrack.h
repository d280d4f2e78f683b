#ifndef BELIEFTRACK_H
#define BELIEFTRACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BtkStatus {
  BTK_STATUS_OK = 0,
  BTK_STATUS_NULL_POINTER = 1,
  BTK_STATUS_INVALID_UTF8 = 2,
  BTK_STATUS_INVALID_INPUT = 3,
  BTK_STATUS_TRACKING_FAILED = 4,
  BTK_STATUS_NO_ANSWER = 5,
  BTK_STATUS_GENERATION_FAILED = 6,
  BTK_STATUS_ORACLE_FAILED = 7,
  BTK_STATUS_PANIC = 99,
} BtkStatus;

/**
 * A tracked story ready to answer questions.
 */
typedef struct BtkSession BtkSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *btk_last_error(void);

/**
 * Parses one story record (a corpus line) and runs the tracker over it
 * with belief depth `m`.
 *
 * # Safety
 * `story_json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BtkStatus btk_session_new(const char *story_json, uint32_t m, struct BtkSession **out);

/**
 * Answers a question about the session's story. The answer is a container
 * name to be freed with `btk_string_free`.
 *
 * # Safety
 * `session` must come from `btk_session_new`, `question` must be a
 * NUL-terminated string and `out` a valid pointer.
 */
enum BtkStatus btk_session_answer(const struct BtkSession *session,
                                  const char *question,
                                  char **out);

/**
 * # Safety
 * `session` must come from `btk_session_new` and not be used afterwards.
 */
void btk_session_free(struct BtkSession *session);

/**
 * Generates `n` stories of `set` (`tomi`, `d1`, `d2` or `d3`) as JSONL.
 *
 * # Safety
 * `set` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BtkStatus btk_generate(const char *set,
                            uint32_t n,
                            uint64_t seed,
                            bool paraphrase,
                            char **out);

/**
 * Gold answers of every question in a story record, as a JSON array of
 * container names in question order.
 *
 * # Safety
 * `story_json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BtkStatus btk_oracle_solve(const char *story_json, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed only once.
 */
void btk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELIEFTRACK_H */

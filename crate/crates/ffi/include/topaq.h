#ifndef TOPAQ_H
#define TOPAQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status returned by every fallible call.
typedef enum TopaqStatus {
  TOPAQ_STATUS_OK = 0,
  TOPAQ_STATUS_NULL_ARGUMENT = 1,
  TOPAQ_STATUS_INVALID_UTF8 = 2,
  TOPAQ_STATUS_PARSE = 3,
  TOPAQ_STATUS_BAD_ARGUMENT = 4,
  // The question is outside every implemented engine.
  TOPAQ_STATUS_REFUSED = 5,
  TOPAQ_STATUS_FAILED = 6,
  TOPAQ_STATUS_PANIC = 7,
} TopaqStatus;

// A parsed timed automaton.
typedef struct TopaqModel TopaqModel;

// The outcome of a check.
typedef struct TopaqVerdict TopaqVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses model text into `*out`.
//
// # Safety
// `text` is a NUL-terminated string and `out` is writable.
enum TopaqStatus topaq_model_parse(const char *text, struct TopaqModel **out);

// # Safety
// `model` is null or came from [`topaq_model_parse`] and is not used afterwards.
void topaq_model_free(struct TopaqModel *model);

// Classification report as text; null if `model` is null.
//
// # Safety
// `model` is null or a live handle.
char *topaq_model_classify(const struct TopaqModel *model);

// Runs a check. `mode` is `exists`, `weak` or `full`; `obs` is null or an observer
// spec such as `first:2`; `engine` is null (auto) or an engine name.
//
// # Safety
// String arguments are null or NUL-terminated, `model` is a live handle, `out` is writable.
enum TopaqStatus topaq_check(const struct TopaqModel *model,
                             const char *mode,
                             const char *obs,
                             const char *engine,
                             struct TopaqVerdict **out);

// # Safety
// `v` is null or came from [`topaq_check`] and is not used afterwards.
void topaq_verdict_free(struct TopaqVerdict *v);

// 1 if the property holds, 0 if not, -1 for a null handle.
//
// # Safety
// `v` is null or a live handle.
int32_t topaq_verdict_holds(const struct TopaqVerdict *v);

// 1 if the answer is exact, 0 if it comes from an exhausted bounded search.
//
// # Safety
// `v` is null or a live handle.
int32_t topaq_verdict_definitive(const struct TopaqVerdict *v);

// Command-line exit code for this verdict: 0 holds, 1 violated, 2 inconclusive.
//
// # Safety
// `v` is null or a live handle.
int32_t topaq_verdict_exit_code(const struct TopaqVerdict *v);

// Witness word such as `(a, 0)(b, 1/2)`, or null when there is none.
//
// # Safety
// `v` is null or a live handle.
char *topaq_verdict_witness(const struct TopaqVerdict *v);

// Message for the last failure on this thread, or null. Valid until the next call.
const char *topaq_last_error(void);

// # Safety
// `s` is null or a string returned by this library.
void topaq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPAQ_H */

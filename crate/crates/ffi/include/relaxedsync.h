#ifndef RELAXEDSYNC_H
#define RELAXEDSYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Correctness condition for [`rs_check_trace`].
 */
typedef enum RsCondition {
  RS_CONDITION_LIN_STACK = 0,
  RS_CONDITION_LIN_QUEUE = 1,
  RS_CONDITION_SET_LIN_STACK = 2,
  RS_CONDITION_SET_LIN_QUEUE = 3,
  RS_CONDITION_INTERVAL_QUEUE = 4,
} RsCondition;

/**
 * What a removal returned.
 */
typedef enum RsResultKind {
  RS_RESULT_KIND_ITEM = 0,
  RS_RESULT_KIND_EMPTY = 1,
  RS_RESULT_KIND_WEAK_EMPTY = 2,
} RsResultKind;

/**
 * Result code of every call.
 */
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  RS_STATUS_CAPACITY_EXCEEDED = 3,
  RS_STATUS_CONTRACT_VIOLATION = 4,
  RS_STATUS_PARSE_ERROR = 5,
  RS_STATUS_BUDGET_EXCEEDED = 6,
  RS_STATUS_PANIC = 7,
} RsStatus;

/**
 * Opaque concurrent object.
 */
typedef struct RsObject RsObject;

typedef struct RsRemoved {
  enum RsResultKind kind;
  /**
   * The item when `kind` is `Item`, zero otherwise.
   */
  uint32_t item;
} RsRemoved;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an object. `name` is an implementation name such as
 * `"setseqstack"`; `capacity` of zero picks a default.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum RsStatus rs_object_new(const char *name,
                            size_t procs,
                            uint64_t capacity,
                            struct RsObject **out);

/**
 * Releases an object. Null is ignored.
 *
 * # Safety
 * `obj` must be null or a handle from `rs_object_new` not yet freed, and
 * no other thread may be using it.
 */
void rs_object_free(struct RsObject *obj);

/**
 * Pushes or enqueues `item` (nonzero) on behalf of process `pid`.
 *
 * # Safety
 * `obj` must be a live handle.
 */
enum RsStatus rs_insert(const struct RsObject *obj, size_t pid, uint32_t item);

/**
 * Pops or dequeues on behalf of process `pid`.
 *
 * # Safety
 * `obj` must be a live handle and `out` a writable pointer.
 */
enum RsStatus rs_remove(const struct RsObject *obj, size_t pid, struct RsRemoved *out);

/**
 * Checks a trace in the text format written by the command-line tool.
 * `budget` of zero keeps the default search budget. `accepted` receives 1
 * or 0 when the status is `Ok`.
 *
 * # Safety
 * `trace` must be a NUL-terminated string and `accepted` a writable pointer.
 */
enum RsStatus rs_check_trace(const char *trace,
                             enum RsCondition condition,
                             uint64_t budget,
                             int32_t *accepted);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`) and returns its full length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rs_last_error(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELAXEDSYNC_H */

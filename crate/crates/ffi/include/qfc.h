#ifndef QFC_H
#define QFC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Default synthesis tolerance.
#define QFC_DEFAULT_EPS 1e-10

// Largest QRAM pool a device accepts.
#define QFC_MAX_POOL 20

typedef enum QfcFault {
  QFC_FAULT_NONE = 0,
  QFC_FAULT_UNKNOWN_ADDRESS = 1,
  QFC_FAULT_POOL_EXHAUSTED = 2,
  QFC_FAULT_DUPLICATE_ADDRESS = 3,
  QFC_FAULT_ARITY_MISMATCH = 4,
} QfcFault;

typedef enum QfcGate {
  QFC_GATE_N = 0,
  QFC_GATE_H = 1,
  QFC_GATE_V = 2,
  QFC_GATE_W = 3,
  QFC_GATE_NC = 4,
  QFC_GATE_HC = 5,
  QFC_GATE_VC = 6,
  QFC_GATE_WC = 7,
  QFC_GATE_X = 8,
} QfcGate;

typedef enum QfcOpcode {
  QFC_OPCODE_ALLOC = 0,
  QFC_OPCODE_APPLY = 1,
  QFC_OPCODE_MEASURE = 2,
  QFC_OPCODE_FREE = 3,
} QfcOpcode;

typedef enum QfcReplyKind {
  QFC_REPLY_KIND_ALLOCATED = 0,
  QFC_REPLY_KIND_BIT = 1,
  QFC_REPLY_KIND_ACK = 2,
  QFC_REPLY_KIND_FAULT = 3,
} QfcReplyKind;

typedef enum QfcStatus {
  QFC_STATUS_OK = 0,
  // A required pointer argument was null.
  QFC_STATUS_NULL_ARGUMENT = 1,
  QFC_STATUS_INVALID_UTF8 = 2,
  QFC_STATUS_PARSE_ERROR = 3,
  QFC_STATUS_TYPE_ERROR = 4,
  // An option or input document was rejected.
  QFC_STATUS_INVALID_ARGUMENT = 5,
  // The program needs more qubits than allowed.
  QFC_STATUS_LIMIT_EXCEEDED = 6,
  // A sampled shot drove the device into a fault.
  QFC_STATUS_DEVICE_FAULT = 7,
  // Synthesis found no sequence within the depth bound. The result
  // document is still written.
  QFC_STATUS_NOT_FOUND = 8,
  // An internal error was caught at the boundary.
  QFC_STATUS_PANIC = 9,
} QfcStatus;

// A QRAM device with its own random stream.
typedef struct QfcDevice QfcDevice;

// A parsed and typechecked program.
typedef struct QfcProgram QfcProgram;

typedef struct QfcExactOptions {
  size_t max_qubits;
  double loop_tol;
  size_t max_iters;
  bool keep_branches;
  // Optional JSON matrix bound to the leading allocations of `main`; may be null.
  const char *input_state_json;
} QfcExactOptions;

typedef struct QfcShotOptions {
  uint64_t shots;
  uint64_t seed;
  size_t pool_size;
  size_t max_iters;
} QfcShotOptions;

// `gate` and `b` are read only by `Apply`; `b` only for two-qubit gates.
typedef struct QfcInstruction {
  enum QfcOpcode opcode;
  enum QfcGate gate;
  size_t a;
  size_t b;
} QfcInstruction;

// `value` is the address for `Allocated` and the bit for `Bit`.
typedef struct QfcReply {
  enum QfcReplyKind kind;
  size_t value;
  enum QfcFault fault;
} QfcReply;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *qfc_version(void);

// Name of a status code as a static string.
const char *qfc_status_name(enum QfcStatus status);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void qfc_string_free(char *s);

// Parses and typechecks `len` bytes of source. On success `*out` receives a
// program handle; otherwise `*error_json` (if non-null) receives an error
// document listing diagnostics.
//
// # Safety
// `src` must point to `len` readable bytes; `out` must be writable.
enum QfcStatus qfc_program_compile(const uint8_t *src,
                                   size_t len,
                                   struct QfcProgram **out,
                                   char **error_json);

// Releases a program. Null is ignored.
//
// # Safety
// `program` must come from [`qfc_program_compile`] and not have been freed.
void qfc_program_free(struct QfcProgram *program);

struct QfcExactOptions qfc_exact_options_default(void);

struct QfcShotOptions qfc_shot_options_default(void);

// Runs the exact backend; `*out_json` receives the result or error document.
// Null `options` means defaults.
//
// # Safety
// `program` must be a live handle; `options`, if non-null, must be readable.
enum QfcStatus qfc_run_exact(const struct QfcProgram *program,
                             const struct QfcExactOptions *options,
                             char **out_json);

// Runs the sampling backend; `*out_json` receives the result or error
// document. Null `options` means defaults.
//
// # Safety
// `program` must be a live handle; `options`, if non-null, must be readable.
enum QfcStatus qfc_run_shots(const struct QfcProgram *program,
                             const struct QfcShotOptions *options,
                             char **out_json);

// Searches for a gate sequence equal to the JSON target up to phase.
// `lines == 0` infers the line count from the target and `max_depth == 0`
// uses the default bound for that many lines. Returns `NotFound` with the
// search document when no sequence is within `eps`.
//
// # Safety
// `target_json` must be a NUL-terminated string.
enum QfcStatus qfc_synthesize(const char *target_json,
                              size_t lines,
                              double eps,
                              size_t max_depth,
                              char **out_json);

// Creates a device with `pool_size` addresses (at most [`QFC_MAX_POOL`]).
// With `logging` set, every step is recorded for [`qfc_device_log`].
//
// # Safety
// `out` must be writable.
enum QfcStatus qfc_device_new(size_t pool_size,
                              uint64_t seed,
                              bool logging,
                              struct QfcDevice **out);

// Executes one instruction. Device faults are ordinary replies, not errors.
//
// # Safety
// `device` must be a live handle, `instruction` readable, `reply` writable.
enum QfcStatus qfc_device_step(struct QfcDevice *device,
                               const struct QfcInstruction *instruction,
                               struct QfcReply *reply);

// Writes the recorded instruction log, one entry per line, to `*out`.
//
// # Safety
// `device` must be a live handle and `out` writable.
enum QfcStatus qfc_device_log(const struct QfcDevice *device, char **out);

// Releases a device. Null is ignored.
//
// # Safety
// `device` must come from [`qfc_device_new`] and not have been freed.
void qfc_device_free(struct QfcDevice *device);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFC_H */

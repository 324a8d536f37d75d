/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef EFP_H
#define EFP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Termination state of a MIP solve.
typedef enum EfpSolveStatus {
  EFP_SOLVE_STATUS_OPTIMAL = 0,
  EFP_SOLVE_STATUS_FEASIBLE = 1,
  EFP_SOLVE_STATUS_INFEASIBLE = 2,
  EFP_SOLVE_STATUS_UNKNOWN = 3,
} EfpSolveStatus;

// Result code of every fallible call.
typedef enum EfpStatus {
  EFP_STATUS_OK = 0,
  EFP_STATUS_NULL_POINTER = 1,
  EFP_STATUS_INVALID_ARGUMENT = 2,
  EFP_STATUS_PARSE_ERROR = 3,
  EFP_STATUS_SOLVER_ERROR = 4,
  EFP_STATUS_BUFFER_TOO_SMALL = 5,
  EFP_STATUS_PANIC = 6,
} EfpStatus;

// Opaque market handle.
typedef struct EfpInstance EfpInstance;

// Opaque result of [`efp_solve`].
typedef struct EfpResult EfpResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static description of a status code.
const char *efp_status_message(enum EfpStatus status);

// Copies the last error message of this thread into `buf` (NUL
// terminated, truncated to `cap`). Returns the full message length.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t efp_last_error(char *buf, size_t cap);

// Builds a market from parallel edge arrays.
//
// # Safety
// The three arrays must hold `num_edges` entries; `out` must be writable.
enum EfpStatus efp_instance_new(size_t num_items,
                                size_t num_bidders,
                                const size_t *items,
                                const size_t *bidders,
                                const double *values,
                                size_t num_edges,
                                struct EfpInstance **out);

// Generates a preset market of `model` ("characteristics",
// "neighborhood" or "popularity") with `n` items and bidders.
//
// # Safety
// `model` must be a NUL-terminated string; `out` must be writable.
enum EfpStatus efp_instance_generate(const char *model,
                                     size_t n,
                                     uint64_t seed,
                                     struct EfpInstance **out);

// Reads a market from the instance text format.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum EfpStatus efp_instance_parse(const char *text, struct EfpInstance **out);

// Writes the instance text into `buf`. `needed` receives the size
// including the terminating NUL, also when the buffer is too small.
//
// # Safety
// `inst` must come from this library; `buf` must be null or valid for
// `cap` bytes; `needed` must be writable.
enum EfpStatus efp_instance_serialize(const struct EfpInstance *inst,
                                      char *buf,
                                      size_t cap,
                                      size_t *needed);

// Item, bidder and edge counts; any output pointer may be null.
//
// # Safety
// `inst` must come from this library.
enum EfpStatus efp_instance_size(const struct EfpInstance *inst,
                                 size_t *num_items,
                                 size_t *num_bidders,
                                 size_t *num_edges);

// # Safety
// `inst` must be null or come from this library, and not be used again.
void efp_instance_free(struct EfpInstance *inst);

// Revenue of the envy-free allocation induced by `prices`. When
// `assignment` is non-null it receives, per bidder, the item bought or -1.
//
// # Safety
// `prices` must hold `num_items` entries; `assignment` must be null or hold
// `num_bidders` entries; `profit` must be writable.
enum EfpStatus efp_allocate(const struct EfpInstance *inst,
                            const double *prices,
                            size_t num_prices,
                            int64_t *assignment,
                            size_t num_bidders,
                            double *profit);

// Rounds `prices` onto a geometric grid: the factor-4 rounding when
// `eps == 1`, otherwise the `1+eps` rounding for `eps` in (0, 1).
//
// # Safety
// `prices` and `rounded` must hold `num_prices` entries.
enum EfpStatus efp_round(const struct EfpInstance *inst,
                         const double *prices,
                         size_t num_prices,
                         double eps,
                         double *rounded);

// Guaranteed profit fraction of the `1+eps` rounding.
//
// # Safety
// `out` must be writable.
enum EfpStatus efp_guarantee_factor(double eps, double *out);

// Builds formulation `formulation` ("STM", "I", "L", "P" or "U") and
// solves it by branch-and-bound. A non-positive `time_limit` means none.
//
// # Safety
// `inst` must come from this library; `formulation` must be a
// NUL-terminated string; `out` must be writable.
enum EfpStatus efp_solve(const struct EfpInstance *inst,
                         const char *formulation,
                         double time_limit,
                         struct EfpResult **out);

// Summary of a solve; any output pointer may be null.
//
// # Safety
// `res` must come from [`efp_solve`].
enum EfpStatus efp_result_summary(const struct EfpResult *res,
                                  enum EfpSolveStatus *status,
                                  double *objective,
                                  double *bound,
                                  double *gap,
                                  uint64_t *nodes);

// Prices and per-bidder items (-1 when unserved) of the incumbent.
// Either output may be null.
//
// # Safety
// `res` must come from [`efp_solve`]; `prices` must be null or hold
// `num_items` entries; `assignment` null or `num_bidders` entries.
enum EfpStatus efp_result_outcome(const struct EfpResult *res,
                                  double *prices,
                                  size_t num_items,
                                  int64_t *assignment,
                                  size_t num_bidders);

// # Safety
// `res` must be null or come from [`efp_solve`], and not be used again.
void efp_result_free(struct EfpResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EFP_H */

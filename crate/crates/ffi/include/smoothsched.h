#ifndef SMOOTHSCHED_H
#define SMOOTHSCHED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_ARGUMENT = 2,
  SS_STATUS_INVALID_INSTANCE = 3,
  SS_STATUS_INFEASIBLE = 4,
  SS_STATUS_BUDGET_EXCEEDED = 5,
  SS_STATUS_TOO_LARGE = 6,
  SS_STATUS_PARSE = 7,
  SS_STATUS_PANIC = 8,
} SsStatus;

typedef enum SsNeighborhood {
  SS_NEIGHBORHOOD_JUMP = 0,
  SS_NEIGHBORHOOD_LEX_JUMP = 1,
} SsNeighborhood;

typedef enum SsPivot {
  SS_PIVOT_FIRST = 0,
  SS_PIVOT_MAX_GAIN = 1,
  SS_PIVOT_MIN_GAIN = 2,
  /**
   * Uses the seed passed alongside.
   */
  SS_PIVOT_RANDOM = 3,
} SsPivot;

/**
 * Opaque instance handle.
 */
typedef struct SsInstance SsInstance;

/**
 * Opaque schedule handle.
 */
typedef struct SsSchedule SsSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ss_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ss_string_free(char *s);

/**
 * Unrestricted instance from `m` non-increasing speeds and `n` processing
 * requirements.
 *
 * # Safety
 * `speeds` and `jobs` must point to `m` and `n` readable doubles; `out` must
 * be writable.
 */
enum SsStatus ss_instance_new(const double *speeds,
                              uintptr_t m,
                              const double *jobs,
                              uintptr_t n,
                              struct SsInstance **out);

/**
 * Instance from its JSON form (one-based machine indices in allowed sets).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum SsStatus ss_instance_from_json(const char *text, struct SsInstance **out);

/**
 * Sample an instance from a smoothed spec given as JSON.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum SsStatus ss_instance_sample(const char *spec_json, uint64_t seed, struct SsInstance **out);

/**
 * # Safety
 * `instance` must be a live handle; `out` must be writable. Free the string
 * with [`ss_string_free`].
 */
enum SsStatus ss_instance_to_json(const struct SsInstance *instance, char **out);

/**
 * # Safety
 * `instance` must be null or a live handle; it is invalid afterwards.
 */
void ss_instance_free(struct SsInstance *instance);

/**
 * # Safety
 * `instance` must be a live handle.
 */
uintptr_t ss_instance_num_jobs(const struct SsInstance *instance);

/**
 * # Safety
 * `instance` must be a live handle.
 */
uintptr_t ss_instance_num_machines(const struct SsInstance *instance);

/**
 * Schedule from `n` zero-based machine indices.
 *
 * # Safety
 * `assignment` must point to `n` readable values; `out` must be writable.
 */
enum SsStatus ss_schedule_new(const uintptr_t *assignment, uintptr_t n, struct SsSchedule **out);

/**
 * Copy the assignment into `buf`, which must hold `len` entries, the number
 * of jobs.
 *
 * # Safety
 * `schedule` must be a live handle; `buf` must point to `len` writable values.
 */
enum SsStatus ss_schedule_assignment(const struct SsSchedule *schedule,
                                     uintptr_t *buf,
                                     uintptr_t len);

/**
 * # Safety
 * `schedule` must be null or a live handle; it is invalid afterwards.
 */
void ss_schedule_free(struct SsSchedule *schedule);

/**
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SsStatus ss_makespan(const struct SsInstance *instance,
                          const struct SsSchedule *schedule,
                          double *out);

/**
 * List schedule for a job order of length `n`; a null `order` means the
 * identity order.
 *
 * # Safety
 * `instance` must be live; `order` null or pointing to `n` values; `out`
 * writable.
 */
enum SsStatus ss_list_schedule(const struct SsInstance *instance,
                               const uintptr_t *order,
                               uintptr_t n,
                               struct SsSchedule **out);

/**
 * # Safety
 * `instance` must be live; `out` writable.
 */
enum SsStatus ss_lpt_schedule(const struct SsInstance *instance, struct SsSchedule **out);

/**
 * Local search from `start` until no improving move remains. `steps` may be
 * null.
 *
 * # Safety
 * Handles must be live; `out` writable; `steps` null or writable.
 */
enum SsStatus ss_local_search(const struct SsInstance *instance,
                              const struct SsSchedule *start,
                              enum SsNeighborhood nb,
                              enum SsPivot rule,
                              uint64_t seed,
                              double eps,
                              struct SsSchedule **out,
                              uintptr_t *steps);

/**
 * # Safety
 * Handles must be live; `out` writable.
 */
enum SsStatus ss_is_locally_optimal(const struct SsInstance *instance,
                                    const struct SsSchedule *schedule,
                                    enum SsNeighborhood nb,
                                    double eps,
                                    bool *out);

/**
 * Exact optimum. `schedule` may be null when only the value is wanted.
 *
 * # Safety
 * `instance` must be live; `makespan` writable; `schedule` null or writable.
 */
enum SsStatus ss_optimal_makespan(const struct SsInstance *instance,
                                  uint64_t budget,
                                  double *makespan,
                                  struct SsSchedule **schedule);

/**
 * Ratio of the worst local optimum to the optimum, by enumeration.
 *
 * # Safety
 * `instance` must be live; `ratio` writable.
 */
enum SsStatus ss_worst_local_optimum(const struct SsInstance *instance,
                                     enum SsNeighborhood nb,
                                     uint64_t budget,
                                     double eps,
                                     double *ratio);

/**
 * Sample a lower-bound construction by name and write its metadata, sample
 * summary and checks as JSON. Free the string with [`ss_string_free`].
 *
 * # Safety
 * `name` and `params_json` must be NUL-terminated strings; `out` writable.
 */
enum SsStatus ss_construct(const char *name,
                           const char *params_json,
                           bool lenient,
                           uint64_t seed,
                           double eps,
                           char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMOOTHSCHED_H */

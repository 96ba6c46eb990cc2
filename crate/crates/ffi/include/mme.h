#ifndef MME_H
#define MME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

#define MME_SCHEME_EVENT_DRIVEN 0

#define MME_SCHEME_BINNED 1

typedef enum MmeStatus {
  MME_STATUS_OK = 0,
  MME_STATUS_NULL_POINTER = 1,
  MME_STATUS_INVALID_ARGUMENT = 2,
  MME_STATUS_DIMENSION = 3,
  MME_STATUS_VALIDATION = 4,
  MME_STATUS_COMPLETENESS = 5,
  MME_STATUS_IMPOSSIBLE_OUTCOME = 6,
  MME_STATUS_UNSUPPORTED_FOR_PURE_STATE = 7,
  MME_STATUS_UNDEFINED_RATIO = 8,
  MME_STATUS_CONFIGURATION = 9,
  MME_STATUS_NUMERICAL_FAILURE = 10,
  MME_STATUS_IO = 11,
  MME_STATUS_BUFFER_TOO_SMALL = 12,
  MME_STATUS_PANIC = 13,
} MmeStatus;

/**
 * Ensemble mean and standard error on the sample grid.
 */
typedef struct MmeEnsemble MmeEnsemble;

/**
 * Density-matrix propagation result.
 */
typedef struct MmePropagation MmePropagation;

/**
 * Single trajectory result.
 */
typedef struct MmeTrajectory MmeTrajectory;

typedef struct MmeBloch {
  double u;
  double v;
  double w;
} MmeBloch;

typedef struct MmeSequenceState {
  double alpha_re;
  double alpha_im;
  double beta_re;
  double beta_im;
  double probability;
} MmeSequenceState;

/**
 * Rabi frequency, error probability and measurement rate.
 */
typedef struct MmeAtom {
  double omega;
  double p;
  double rate;
} MmeAtom;

typedef struct MmeTrajectoryConfig {
  /**
   * `MME_SCHEME_EVENT_DRIVEN` or `MME_SCHEME_BINNED`.
   */
  uint32_t scheme;
  double dt;
  double t_final;
  double sample_interval;
  uint64_t seed;
  /**
   * Non-zero to keep the per-measurement event log.
   */
  uint8_t record_events;
} MmeTrajectoryConfig;

/**
 * Logged measurement; `outcome` is 0 for result `1` and 1 for result `2`.
 */
typedef struct MmeEvent {
  double time;
  uint32_t outcome;
  double w_before;
  double w_after;
  double gap;
} MmeEvent;

/**
 * Telegraph statistics; `mean_dwell` is NaN when no dwell was completed.
 */
typedef struct MmeJumpSummary {
  size_t jumps;
  size_t filaments;
  size_t dwell_count;
  double mean_dwell;
  double jump_rate;
  double filament_rate;
} MmeJumpSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * NUL-terminated version string with static lifetime.
 */
const char *mme_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * excluding the terminator, or 0 when there is no message.
 */
size_t mme_last_error_message(char *buf, size_t len);

enum MmeStatus mme_gamma_of(double rate, double p, double *out);

/**
 * Error probability giving dephasing rate `gamma` at measurement rate `rate`.
 */
enum MmeStatus mme_error_probability_for_gamma(double gamma, double rate, double *out);

enum MmeStatus mme_analytic_bloch(struct MmeBloch b0,
                                  double t,
                                  double omega,
                                  double gamma,
                                  struct MmeBloch *out);

/**
 * Writes `(u̇, v̇, ẇ)` into `out`.
 */
enum MmeStatus mme_bloch_derivatives(struct MmeBloch b,
                                     double omega,
                                     double gamma,
                                     struct MmeBloch *out);

/**
 * `outcomes` holds zero-based results (0 for `1`, 1 for `2`).
 */
enum MmeStatus mme_sequence_state(double alpha_re,
                                  double alpha_im,
                                  double beta_re,
                                  double beta_im,
                                  double p,
                                  const uint32_t *outcomes,
                                  size_t n_outcomes,
                                  struct MmeSequenceState *out);

enum MmeStatus mme_mini_jump_ratio(double epsilon, double p, double *out);

/**
 * RK4 propagation of the measurement master equation from Bloch vector `b0`
 * (any point of the closed ball).
 */
enum MmeStatus mme_propagate(struct MmeAtom atom,
                             struct MmeBloch b0,
                             double t_final,
                             double dt,
                             double sample_interval,
                             struct MmePropagation **out);

enum MmeStatus mme_propagation_len(const struct MmePropagation *h, size_t *out);

enum MmeStatus mme_propagation_copy(const struct MmePropagation *h,
                                    double *times,
                                    struct MmeBloch *blochs,
                                    size_t cap);

void mme_propagation_free(struct MmePropagation *h);

/**
 * Runs one trajectory from the pure state with Bloch vector `b0`.
 */
enum MmeStatus mme_trajectory_run(struct MmeAtom atom,
                                  struct MmeBloch b0,
                                  struct MmeTrajectoryConfig config,
                                  struct MmeTrajectory **out);

enum MmeStatus mme_trajectory_sample_count(const struct MmeTrajectory *h, size_t *out);

enum MmeStatus mme_trajectory_copy_samples(const struct MmeTrajectory *h,
                                           double *times,
                                           struct MmeBloch *blochs,
                                           size_t cap);

/**
 * Number of measurements performed (independent of event logging).
 */
enum MmeStatus mme_trajectory_measurement_count(const struct MmeTrajectory *h, size_t *out);

/**
 * Number of logged events (0 when logging was off).
 */
enum MmeStatus mme_trajectory_event_count(const struct MmeTrajectory *h, size_t *out);

enum MmeStatus mme_trajectory_copy_events(const struct MmeTrajectory *h,
                                          struct MmeEvent *events,
                                          size_t cap);

enum MmeStatus mme_trajectory_detect_jumps(const struct MmeTrajectory *h,
                                           double band,
                                           struct MmeJumpSummary *out);

void mme_trajectory_free(struct MmeTrajectory *h);

/**
 * Runs `n` trajectories (member `i` seeded from `config.seed` and `i`) and
 * keeps their pointwise mean.
 */
enum MmeStatus mme_ensemble_run(struct MmeAtom atom,
                                struct MmeBloch b0,
                                struct MmeTrajectoryConfig config,
                                size_t n,
                                struct MmeEnsemble **out);

enum MmeStatus mme_ensemble_len(const struct MmeEnsemble *h, size_t *out);

/**
 * `stderr` receives standard errors of the mean packed as `(u, v, w)`.
 */
enum MmeStatus mme_ensemble_copy(const struct MmeEnsemble *h,
                                 double *times,
                                 struct MmeBloch *means,
                                 struct MmeBloch *stderr,
                                 size_t cap);

void mme_ensemble_free(struct MmeEnsemble *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MME_H */

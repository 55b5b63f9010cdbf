#ifndef HYDROQUAD_H
#define HYDROQUAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of rotors; length of every per-rotor array.
 */
#define HQ_ROTORS 8

#define HQ_STATE_2D 6

#define HQ_STATE_3D 12

typedef enum HqStatus {
  HQ_STATUS_OK = 0,
  HQ_STATUS_NULL_POINTER = 1,
  HQ_STATUS_INVALID_ARGUMENT = 2,
  HQ_STATUS_CONFIG_ERROR = 3,
  HQ_STATUS_INTEGRATION_ERROR = 4,
  HQ_STATUS_STAGE_TIMEOUT = 5,
  HQ_STATUS_IO_ERROR = 6,
  HQ_STATUS_INDEX_OUT_OF_RANGE = 7,
  HQ_STATUS_PANIC = 8,
} HqStatus;

/**
 * Scenario configuration.
 */
typedef struct HqConfig HqConfig;

/**
 * Logged mission trajectory.
 */
typedef struct HqTrajectory HqTrajectory;

/**
 * One trajectory row. `stage` is 0 for hover, 1-5 for mission stages and
 * 6 once the mission is complete.
 */
typedef struct HqSample {
  double t;
  double x;
  double y;
  double z;
  double theta_deg;
  double theta_rate;
  double omega[HQ_ROTORS];
  double rho[HQ_ROTORS];
  uint8_t stage;
  uint8_t cut_mask;
  bool shortfall;
  double collective;
  double thrust_demand;
  double thrust_delivered;
} HqSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *hq_last_error_message(void);

/**
 * Default scenario. Never null.
 */
struct HqConfig *hq_config_default(void);

/**
 * Parse a TOML scenario from a NUL-terminated string.
 *
 * # Safety
 * `text` must be a valid C string and `out` a writable pointer.
 */
enum HqStatus hq_config_parse(const char *text, struct HqConfig **out);

/**
 * Load a TOML scenario file.
 *
 * # Safety
 * `path` must be a valid C string and `out` a writable pointer.
 */
enum HqStatus hq_config_load(const char *path, struct HqConfig **out);

/**
 * # Safety
 * `cfg` must come from this library and not be freed twice. Null is ignored.
 */
void hq_config_free(struct HqConfig *cfg);

/**
 * Thrust of one rotor at `omega` rad/s in fluid of density `rho`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum HqStatus hq_rotor_thrust(const struct HqConfig *cfg, double omega, double rho, double *out);

/**
 * Fluid density seen by a rotor at `station` when the centroid is at `z`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum HqStatus hq_density_at(const struct HqConfig *cfg, double z, double station, double *out);

/**
 * Planar derivative. `state` is `[x, z, vx, vz, theta, theta_rate]`,
 * `omega` holds `HQ_ROTORS` speeds; `out` receives `HQ_STATE_2D` values.
 *
 * # Safety
 * Arrays must have the stated lengths.
 */
enum HqStatus hq_derivative_2d(const struct HqConfig *cfg,
                               const double *state,
                               const double *omega,
                               double *out);

/**
 * Full derivative. `state` is `[X, Y, Z, vx, vy, vz, phi, theta, psi, p, q, r]`.
 *
 * # Safety
 * Arrays must have the stated lengths.
 */
enum HqStatus hq_derivative_3d(const struct HqConfig *cfg,
                               const double *state,
                               const double *omega,
                               double *out);

/**
 * Run the configured mission. On success or on a run failure `*out`
 * receives the (possibly partial) trajectory; on argument errors it is
 * left untouched.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum HqStatus hq_run_mission(const struct HqConfig *cfg, struct HqTrajectory **out);

/**
 * # Safety
 * `traj` must be a live handle or null (returns 0).
 */
size_t hq_trajectory_len(const struct HqTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle and `out` writable.
 */
enum HqStatus hq_trajectory_get(const struct HqTrajectory *traj,
                                size_t index,
                                struct HqSample *out);

/**
 * Write the trajectory as CSV.
 *
 * # Safety
 * `traj` must be a live handle and `path` a valid C string.
 */
enum HqStatus hq_trajectory_write_csv(const struct HqTrajectory *traj, const char *path);

/**
 * # Safety
 * `traj` must come from this library and not be freed twice. Null is ignored.
 */
void hq_trajectory_free(struct HqTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYDROQUAD_H */

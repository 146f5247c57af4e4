/*
 * C interface to the onav small-body optical-navigation simulator.
 *
 * All functions return ONAV_OK (0) on success and a nonzero status code on
 * failure; onav_last_error() returns a message for the most recent failure
 * on the calling thread.  Handles are opaque and must be released with
 * onav_scenario_destroy().
 */
#ifndef ONAV_C_H
#define ONAV_C_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct onav_scenario onav_scenario;

typedef enum onav_status {
  ONAV_OK = 0,
  ONAV_ERR_DOMAIN = 1,
  ONAV_ERR_SINGULAR = 2,
  ONAV_ERR_DEGENERATE = 3,
  ONAV_ERR_INFEASIBLE = 4,
  ONAV_ERR_PROPAGATION = 5,
  ONAV_ERR_FILTER = 6,
  ONAV_ERR_IO = 7,
  ONAV_ERR_CONFIG = 8,
  ONAV_ERR_INTERNAL = 9
} onav_status;

typedef struct onav_trial_summary {
  int verdict; /* 0 success, 1 diverged, 2 error */
  double delta_v_mps;
  double fuel_kg;
  double max_accel_mps2;
  double inside_bound_fraction;
} onav_trial_summary;

typedef struct onav_campaign_stats {
  int n_trials;
  int n_success;
  double success_rate;
  double inside_bound_fraction;
} onav_campaign_stats;

const char* onav_version(void);
const char* onav_last_error(void);

/* Scenario lifecycle.  Builtin names: "stationkeeping", "approach". */
onav_status onav_scenario_builtin(const char* name, onav_scenario** out);
onav_status onav_scenario_load(const char* json_path, onav_scenario** out);
onav_status onav_scenario_save(const onav_scenario* s, const char* json_path);
void onav_scenario_destroy(onav_scenario* s);

/* Common overrides used by the command line. */
onav_status onav_scenario_set_mode(onav_scenario* s, const char* mode);
onav_status onav_scenario_set_seed(onav_scenario* s, uint64_t seed);
onav_status onav_scenario_set_shape(onav_scenario* s, double a, double b, double c);
onav_status onav_scenario_set_duration_days(onav_scenario* s, double days);

/* Closed-loop trial: writes trial.csv, controller.csv, filter.csv,
 * summary.json and manifest.json into out_dir. */
onav_status onav_run_trial(const onav_scenario* s, const char* out_dir,
                           onav_trial_summary* summary);

/* Monte Carlo campaign: writes campaign_summary.csv, campaign_stats.json,
 * quantiles.csv, dv_histogram.csv and manifest.json into out_dir. */
onav_status onav_monte_carlo(const onav_scenario* s, int n_trials, int parallelism,
                             const char* out_dir, onav_campaign_stats* stats);

/* Measurement sweeps: write sweep.csv, sweep_stats.json and manifest.json.
 * crossing_km (nullable) receives the first range at which the 3-sigma bound
 * reaches 10% of range, or -1 when it never does. */
onav_status onav_sweep_distance(const onav_scenario* s, int n_cases,
                                double range_min_km, double range_max_km,
                                const char* out_dir, double* crossing_km);
onav_status onav_sweep_angle(const onav_scenario* s, int n_cases, double range_km,
                             const char* out_dir);

/* Render one nadir-pointed frame from position (km, Hill frame) at time t_s;
 * writes a P5 PGM and a limb-point CSV (columns u,v).  n_limb (nullable)
 * receives the detected point count. */
onav_status onav_render(const onav_scenario* s, double pos_x_km, double pos_y_km,
                        double pos_z_km, double t_s, const char* pgm_path,
                        const char* limb_csv_path, int* n_limb);

/* Build SVG plots from the CSVs found in a run directory. */
onav_status onav_report(const char* run_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ONAV_C_H */

#ifndef DARKPOOL_CAPI_H
#define DARKPOOL_CAPI_H

/* C surface of the solver/simulator library. All entry points return an
 * error code; on failure dp_last_error() holds a message for the calling
 * thread. Run functions write CSV artifacts plus a manifest.json into the
 * given directory (created if missing). */

#ifdef __cplusplus
extern "C" {
#endif

typedef struct dp_config dp_config;

enum {
    DP_OK = 0,
    DP_ERR_INVALID_ARG = 1, /* bad config value, unknown key, bad handle */
    DP_ERR_RUNTIME = 2,     /* solver failure (divergence, CFL, ...) */
    DP_ERR_IO = 3           /* unreadable input or unwritable output */
};

const char* dp_version(void);

/* Message for this thread's most recent failure; empty if none. */
const char* dp_last_error(void);

/* Config handles. `preset` is "table1" or "table2"; `json_text` follows the
 * schema in docs/config.md. dp_config_apply layers an override fragment on
 * top of an existing handle. */
int dp_config_create(const char* preset, dp_config** out);
int dp_config_parse(const char* json_text, dp_config** out);
int dp_config_apply(dp_config* cfg, const char* json_text);

/* Canonical JSON echo of a config; free the result with dp_string_free. */
int dp_config_dump(const dp_config* cfg, char** out_json);
void dp_string_free(char* s);
void dp_config_free(dp_config* cfg);

/* Trader best responses on a q grid at the configured fees:
 * strategy.csv (q, nu, ell_i, driver). */
int dp_solve_trader(const dp_config* cfg, const char* out_dir);

/* Mean-field equilibrium: mfg_paths.csv (t, mu, E, major inventory),
 * mfg_residuals.csv, mfg_density.csv snapshots. */
int dp_solve_mfg(const dp_config* cfg, const char* out_dir);

/* Actor-critic fee training: training_log.csv, fee_schedule.csv along the
 * nominal depletion path, critic.txt / actor.txt checkpoints. */
int dp_train_fees(const dp_config* cfg, const char* out_dir);

/* Monte-Carlo run of the configured market: paths.csv, summary.csv,
 * impact_histogram.csv (and trajectory.csv when enabled). */
int dp_simulate(const dp_config* cfg, const char* out_dir);

/* Almgren-Chriss lit-only benchmark: ac_schedule.csv, ac_summary.csv. */
int dp_benchmark_ac(const dp_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* DARKPOOL_CAPI_H */

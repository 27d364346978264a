/*
 * bellsim C API.
 *
 * Every fallible call returns a bellsim_status; on failure a message is
 * available from bellsim_last_error() on the calling thread. Handles are
 * opaque and owned by the caller, who releases them with the matching
 * *_free function. Strings returned through char** are released with
 * bellsim_string_free.
 */
#ifndef BELLSIM_BELLSIM_H
#define BELLSIM_BELLSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(BELLSIM_BUILDING_LIBRARY)
#define BELLSIM_API __attribute__((visibility("default")))
#else
#define BELLSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bellsim_status {
    BELLSIM_OK = 0,
    BELLSIM_E_INVALID_ARGUMENT = 1,
    BELLSIM_E_PARSE = 2,
    BELLSIM_E_IO = 3,
    BELLSIM_E_INSUFFICIENT_DATA = 4,
    BELLSIM_E_FIT_FAILURE = 5,
    BELLSIM_E_NOT_FOUND = 6,
    BELLSIM_E_STALE_TRIAL = 7,
    BELLSIM_E_INTERNAL = 99
} bellsim_status;

typedef struct bellsim_config bellsim_config;
typedef struct bellsim_result bellsim_result;
typedef struct bellsim_sweep bellsim_sweep;

/* CHSH terms are ordered (a1,b1), (a1,b2), (a2,b1), (a2,b2) with a1 < a2, b1 < b2. */
typedef struct bellsim_bell {
    double E[4];
    double sigma_E[4];
    double S;
    double sigma_S;
    double success_probability;
    int signs[4];
    int super_quantum;
} bellsim_bell;

typedef struct bellsim_witness {
    size_t components;
    double total;
    double sigma_total;
    double bound;
    int violated;
} bellsim_witness;

typedef struct bellsim_sweep_row {
    double threshold;
    double success_probability;
    double sigma_success_probability;
    double S;
    double sigma_S;
} bellsim_sweep_row;

BELLSIM_API const char *bellsim_version(void);
BELLSIM_API const char *bellsim_last_error(void);
BELLSIM_API void bellsim_string_free(char *s);

/* Configuration */
BELLSIM_API bellsim_status bellsim_config_load(const char *path, bellsim_config **out);
BELLSIM_API bellsim_status bellsim_config_parse(const char *text, const char *base_dir, bellsim_config **out);
BELLSIM_API void bellsim_config_free(bellsim_config *cfg);
BELLSIM_API bellsim_status bellsim_config_set_seed(bellsim_config *cfg, uint64_t seed);
BELLSIM_API bellsim_status bellsim_config_set_threads(bellsim_config *cfg, unsigned threads);
/* Nonzero when the config names a counts file to reanalyze instead of a simulation. */
BELLSIM_API int bellsim_config_is_reanalysis(const bellsim_config *cfg);
BELLSIM_API bellsim_status bellsim_config_name(const bellsim_config *cfg, char **out);

/* Runs the configured experiment and any fringe scans, or reanalyzes the
 * counts file. reveal_hidden keeps the cloner angle in the trial log. */
BELLSIM_API bellsim_status bellsim_run(const bellsim_config *cfg, int reveal_hidden, bellsim_result **out);
/* Analyzes a trial log or a counts file. */
BELLSIM_API bellsim_status bellsim_analyze_file(const char *path, bellsim_result **out);
/* Fits each fringe-scan file and evaluates the visibility witness. */
BELLSIM_API bellsim_status bellsim_witness_files(const char *const *paths, size_t count, bellsim_result **out);
BELLSIM_API void bellsim_result_free(bellsim_result *result);

BELLSIM_API bellsim_status bellsim_result_report(const bellsim_result *result, char **out);
BELLSIM_API bellsim_status bellsim_result_bell(const bellsim_result *result, bellsim_bell *out);
BELLSIM_API size_t bellsim_result_witness_count(const bellsim_result *result);
BELLSIM_API bellsim_status bellsim_result_witness(const bellsim_result *result, size_t index, bellsim_witness *out);
/* Fails with BELLSIM_E_INVALID_ARGUMENT when the result holds no trial records. */
BELLSIM_API bellsim_status bellsim_result_write_log(const bellsim_result *result, const char *path);
BELLSIM_API bellsim_status bellsim_result_write_counts(const bellsim_result *result, const char *path);
BELLSIM_API size_t bellsim_result_scan_count(const bellsim_result *result);
BELLSIM_API bellsim_status bellsim_result_scan_label(const bellsim_result *result, size_t index, char **out);
BELLSIM_API bellsim_status bellsim_result_write_scan(const bellsim_result *result, size_t index, const char *path);

/* Threshold sweep. With count == 0 the grid comes from the config. */
BELLSIM_API bellsim_status bellsim_sweep_run(const bellsim_config *cfg, const double *thresholds, size_t count,
                                             bellsim_sweep **out);
BELLSIM_API void bellsim_sweep_free(bellsim_sweep *sweep);
BELLSIM_API size_t bellsim_sweep_row_count(const bellsim_sweep *sweep);
BELLSIM_API bellsim_status bellsim_sweep_get_row(const bellsim_sweep *sweep, size_t index, bellsim_sweep_row *out);
BELLSIM_API bellsim_status bellsim_sweep_report(const bellsim_sweep *sweep, char **out);
BELLSIM_API bellsim_status bellsim_sweep_write_series(const bellsim_sweep *sweep, const char *path);

/* Observer service. Blocks until the process is stopped. host/ui_dir may be
 * NULL and port may be negative to use the config values; port 0 picks a
 * free port. on_ready, if given, receives the bound port before serving. */
typedef void (*bellsim_ready_fn)(int port, void *user);
BELLSIM_API bellsim_status bellsim_serve(const bellsim_config *cfg, const char *host, int port, const char *ui_dir,
                                         bellsim_ready_fn on_ready, void *user);

#ifdef __cplusplus
}
#endif

#endif

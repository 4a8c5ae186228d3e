/* C interface to the cdcache library. All handles are opaque; every call
 * that can fail returns a cdc_status and leaves a message retrievable with
 * cdc_last_error() on the calling thread. */
#ifndef CDCACHE_H
#define CDCACHE_H

#include <stddef.h>
#include <stdint.h>

#if defined(CDC_BUILDING_LIBRARY)
#define CDC_API __attribute__((visibility("default")))
#else
#define CDC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cdc_status {
  CDC_OK = 0,
  CDC_ERR_DOMAIN = 1,
  CDC_ERR_STABILITY = 2,
  CDC_ERR_NUMERICAL = 3,
  CDC_ERR_CONFIG = 4,
  CDC_ERR_IO = 5,
  CDC_ERR_DEGENERATE = 6,
  CDC_ERR_ARGUMENT = 7,
  CDC_ERR_INTERNAL = 8
} cdc_status;

typedef struct cdc_config cdc_config;
typedef struct cdc_pmf cdc_pmf;
typedef struct cdc_report cdc_report;

typedef enum cdc_pmf_kind {
  CDC_PMF_BS_QUEUE = 0,
  CDC_PMF_BS_DELAY = 1,
  CDC_PMF_D2D_QUEUE = 2,
  CDC_PMF_D2D_DELAY = 3,
  CDC_PMF_BASELINE_QUEUE = 4,
  CDC_PMF_BASELINE_DELAY = 5,
  CDC_PMF_USERS_PER_BS = 6
} cdc_pmf_kind;

typedef enum cdc_node_class { CDC_CLASS_BS = 0, CDC_CLASS_D2D = 1, CDC_CLASS_BASELINE_BS = 2 } cdc_node_class;

typedef enum cdc_metric { CDC_METRIC_DELAY = 0, CDC_METRIC_QUEUE_LENGTH = 1 } cdc_metric;

CDC_API const char* cdc_version(void);
CDC_API const char* cdc_status_name(cdc_status s);
/* Message of the last failed call on this thread; "" if none. */
CDC_API const char* cdc_last_error(void);

/* Warnings go to stderr unless a handler is installed; NULL restores it. */
typedef void (*cdc_warning_fn)(const char* message, void* user);
CDC_API void cdc_set_warning_handler(cdc_warning_fn fn, void* user);

/* Configuration */
CDC_API cdc_status cdc_config_default(cdc_config** out);
CDC_API cdc_status cdc_config_parse(const char* text, cdc_config** out);
/* Accepts a config file or any CSV/JSON artifact that embeds one. */
CDC_API cdc_status cdc_config_load(const char* path, cdc_config** out);
CDC_API cdc_status cdc_config_clone(const cdc_config* cfg, cdc_config** out);
CDC_API void cdc_config_free(cdc_config* cfg);
CDC_API int cdc_config_has_key(const char* key);
CDC_API cdc_status cdc_config_set(cdc_config* cfg, const char* key, double value);
CDC_API cdc_status cdc_config_get(const cdc_config* cfg, const char* key, double* out);
CDC_API cdc_status cdc_config_set_seed(cdc_config* cfg, uint64_t seed);
CDC_API uint64_t cdc_config_seed(const cdc_config* cfg);
/* Recomputes the sensing threshold for the given mean BS count per SSR. */
CDC_API cdc_status cdc_config_calibrate_threshold(cdc_config* cfg, double mean_bs_in_ssr);
/* CDC_OK when valid; otherwise CDC_ERR_CONFIG with every violation in
 * cdc_last_error(), one per line. Warnings are passed to the handler. */
CDC_API cdc_status cdc_config_validate(const cdc_config* cfg);
/* Writes the `key = value` text. *needed receives the size including the
 * terminator; buf may be NULL to query it. */
CDC_API cdc_status cdc_config_format(const cdc_config* cfg, char* buf, size_t len, size_t* needed);

/* Closed-form quantities */
CDC_API cdc_status cdc_zipf_pmf(int rank, double nu, int n_lib, double* out);
CDC_API cdc_status cdc_cache_hit_prob(int m, double nu, int n_lib, double* out);
/* out[0..2] = local, D2D, BS request shares. */
CDC_API cdc_status cdc_subset_split(const cdc_config* cfg, double out[3]);
/* out[0..2] = steady BS, steady D2D group, steady baseline BS fractions. */
CDC_API cdc_status cdc_steady_fractions(const cdc_config* cfg, double out[3]);
/* out[0..1] = mean D2D TXs and BSs sensed by a D2D transmitter. */
CDC_API cdc_status cdc_ssr_intensities(const cdc_config* cfg, double out[2]);

/* PMFs */
CDC_API cdc_status cdc_analytic_pmf(const cdc_config* cfg, cdc_pmf_kind kind, cdc_pmf** out);
CDC_API size_t cdc_pmf_size(const cdc_pmf* pmf);
CDC_API double cdc_pmf_at(const cdc_pmf* pmf, size_t n);
CDC_API double cdc_pmf_tail(const cdc_pmf* pmf);
CDC_API double cdc_pmf_mean(const cdc_pmf* pmf);
CDC_API int cdc_pmf_degenerate(const cdc_pmf* pmf);
CDC_API double cdc_total_variation(const cdc_pmf* a, const cdc_pmf* b);
CDC_API void cdc_pmf_free(cdc_pmf* pmf);

/* Simulation (proposed system plus the alpha = 0 baseline on the same seeds) */
CDC_API cdc_status cdc_simulate(const cdc_config* cfg, int64_t slots, int replications, cdc_report** out);
CDC_API cdc_status cdc_report_steady(const cdc_report* r, cdc_node_class cls, double* fraction, double* half_width,
                                     uint64_t* nodes);
CDC_API cdc_status cdc_report_pmf(const cdc_report* r, cdc_node_class cls, cdc_metric metric, cdc_pmf** out);
CDC_API void cdc_report_free(cdc_report* r);

/* Pipelines writing CSV/JSON artifacts into out_dir. On success the run
 * manifest is available from cdc_last_manifest(). */
CDC_API cdc_status cdc_run_analytic(const cdc_config* cfg, const char* out_dir);
CDC_API cdc_status cdc_run_simulate(const cdc_config* cfg, const char* out_dir, int64_t slots, int replications);
/* *all_passed is set to 1 when every toleranced comparison passes. */
CDC_API cdc_status cdc_run_compare(const cdc_config* cfg, const char* out_dir, int64_t slots, int replications,
                                   int* all_passed);
/* simulate = 0 writes analytic rows only. */
CDC_API cdc_status cdc_run_sweep(const cdc_config* cfg, const char* out_dir, const char* param, const double* values,
                                 size_t count, int64_t slots, int replications, int simulate);
CDC_API const char* cdc_last_manifest(void);

/* Parses "a,b,c" or "lo..hi" (with step > 0). With out == NULL only the
 * count is returned. */
CDC_API cdc_status cdc_parse_values(const char* text, double step, double* out, size_t capacity, size_t* count);

#ifdef __cplusplus
}
#endif

#endif

/* C interface to the pooled-testing toolkit. All functions are thread-safe
 * as long as distinct threads do not share a handle being freed. */
#ifndef POOLEDCS_H
#define POOLEDCS_H

#include <stddef.h>
#include <stdint.h>

#if defined(PCS_BUILDING_LIBRARY)
#define PCS_API __attribute__((visibility("default")))
#else
#define PCS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcs_status {
    PCS_OK = 0,
    PCS_INVALID_ARGUMENT = 1,
    PCS_CONFIG_ERROR = 2,
    PCS_RUNTIME_ERROR = 3,
    PCS_IO_ERROR = 4,
    PCS_ASSUMPTION_ERROR = 5
} pcs_status;

typedef struct pcs_config pcs_config;
typedef struct pcs_text pcs_text;

PCS_API const char* pcs_version(void);

/* Message for the last failing call on this thread; "" if none. */
PCS_API const char* pcs_last_error(void);

PCS_API const char* pcs_text_data(const pcs_text* text);
PCS_API size_t pcs_text_size(const pcs_text* text);
PCS_API void pcs_text_free(pcs_text* text);

/* JSON config file; an optional "preset" key picks the base values. */
PCS_API pcs_status pcs_config_load(const char* path, pcs_config** out);
/* "paper" or "desk". */
PCS_API pcs_status pcs_config_preset(const char* name, pcs_config** out);
/* 0 restores the default (hardware concurrency). */
PCS_API pcs_status pcs_config_set_threads(pcs_config* config, unsigned threads);
PCS_API pcs_status pcs_config_to_json(const pcs_config* config, pcs_text** out);
PCS_API void pcs_config_free(pcs_config* config);

/* Writes trials.csv and aggregate.csv into out_dir (created if missing).
 * `summary` may be NULL. */
PCS_API pcs_status pcs_run_sweep(const pcs_config* config, const char* out_dir,
                                 pcs_text** summary);

/* Cross-validates γ for the cell ("n=200,q=0.5,fs=0.04") and returns the CSV
 * rows (with header) of trial `index`. */
PCS_API pcs_status pcs_run_trial(const pcs_config* config, const char* cell, uint64_t index,
                                 pcs_text** csv);

/* Weights for a stored pooling matrix and measurement vector. `config` may be
 * NULL; otherwise sigma, q_a, c_const and force_assumptions are taken from it.
 * The report lists θ, c, κ, Λ̂, W, β and the assumption checks as '#'
 * comments, followed by one β_k per line. */
PCS_API pcs_status pcs_weights_from_files(const pcs_config* config, const char* matrix_path,
                                          const char* measurements_path, pcs_text** report);

/* which: c1, lambda, bernstein, gaussian, trends, auxiliary, surrogate.
 * c1 and lambda use the first cell of the config; surrogate runs 10^4 draws
 * at n=40, p=50, q=0.3. `passed` receives 1 or 0. */
PCS_API pcs_status pcs_validate(const pcs_config* config, const char* which, pcs_text** report,
                                int* passed);

#ifdef __cplusplus
}
#endif

#endif

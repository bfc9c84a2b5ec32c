#ifndef PRANDTL_H
#define PRANDTL_H

/* C interface to the solver library. Handles are opaque; every function
 * that can fail returns a prandtl_status and leaves a message for
 * prandtl_last_error(). Strings returned by the library stay valid until
 * the owning handle is freed (prandtl_last_error: until the next call on
 * the same thread). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum prandtl_status {
    PRANDTL_OK = 0,
    PRANDTL_MONITOR_FAILURE = 2, /* life span exceeded, blow-up or Picard divergence */
    PRANDTL_CONFIG_ERROR = 3,    /* bad document, parameter, data or usage */
    PRANDTL_INTERNAL_ERROR = 4
} prandtl_status;

typedef struct prandtl_config prandtl_config;
typedef struct prandtl_result prandtl_result;

const char* prandtl_version(void);
const char* prandtl_last_error(void);

/* INI configuration; *out is set only on PRANDTL_OK. */
prandtl_status prandtl_config_parse(const char* text, prandtl_config** out);
prandtl_status prandtl_config_load(const char* path, prandtl_config** out);
prandtl_status prandtl_config_set_output_dir(prandtl_config* config, const char* dir);
prandtl_status prandtl_config_set_seed(prandtl_config* config, uint64_t seed);
void prandtl_config_free(prandtl_config* config);

/* subcommand: "unsteady", "steady", "verify-identities", "check-compat" or
 * "inequalities". On PRANDTL_OK and PRANDTL_MONITOR_FAILURE *out holds the
 * result. */
prandtl_status prandtl_run(const prandtl_config* config, const char* subcommand, prandtl_result** out);

/* axis: "h", "dt", "eps", "theta" or NULL for the configured axis; levels
 * ≤ 0 takes the configured count. */
prandtl_status prandtl_convergence(const prandtl_config* config, const char* axis, int levels,
                                   prandtl_result** out);

/* "completed", "life_span_exceeded", "blow_up" or "iteration_divergence". */
const char* prandtl_result_status(const prandtl_result* result);
size_t prandtl_result_artifact_count(const prandtl_result* result);
const char* prandtl_result_artifact(const prandtl_result* result, size_t index);
size_t prandtl_result_summary_count(const prandtl_result* result);
const char* prandtl_result_summary_key(const prandtl_result* result, size_t index);
const char* prandtl_result_summary_value(const prandtl_result* result, size_t index);
/* NULL when the key is absent. */
const char* prandtl_result_get(const prandtl_result* result, const char* key);
void prandtl_result_free(prandtl_result* result);

#ifdef __cplusplus
}
#endif

#endif

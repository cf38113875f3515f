/* C interface to the refracted-reflected Levy process toolkit.
 *
 * All entry points return an rrl_status; on failure a thread-local message
 * is available through rrl_last_error(). Objects are opaque handles owned
 * by the caller and released with their _free function. Strings returned
 * through char** out parameters are heap-allocated and must be released
 * with rrl_string_free().
 */
#ifndef RRLEVY_H
#define RRLEVY_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rrl_status {
    RRL_OK = 0,
    RRL_ERR_INVALID_ARGUMENT = 1,
    RRL_ERR_DOMAIN = 2,
    RRL_ERR_NUMERIC = 3,
    RRL_ERR_PARSE = 4,
    RRL_ERR_INTERNAL = 5
} rrl_status;

typedef enum rrl_target { RRL_TARGET_X = 0, RRL_TARGET_Y = 1 } rrl_target;

typedef struct rrl_model rrl_model;
typedef struct rrl_scale rrl_scale;
typedef struct rrl_context rrl_context;

const char* rrl_version(void);

/* Message from the most recent failing call on this thread. */
const char* rrl_last_error(void);

void rrl_string_free(char* s);

/* ---- model ---------------------------------------------------------- */

rrl_status rrl_model_from_json(const char* json_text, rrl_model** out);
rrl_status rrl_model_from_file(const char* path, rrl_model** out);
void rrl_model_free(rrl_model* model);

rrl_status rrl_model_to_json(const rrl_model* model, char** out_json);
rrl_status rrl_model_hash(const rrl_model* model, char* buffer, size_t buffer_size);

rrl_status rrl_model_psi(const rrl_model* model, double theta, double* out);
rrl_status rrl_model_psi_y(const rrl_model* model, double theta, double* out);
rrl_status rrl_model_phi(const rrl_model* model, double q, double* out);
rrl_status rrl_model_varphi(const rrl_model* model, double q, double* out);
rrl_status rrl_model_net_drift(const rrl_model* model, double* psi_prime0, double* psi_y_prime0);
rrl_status rrl_model_is_bounded_variation(const rrl_model* model, int* out);

/* ---- scale functions ------------------------------------------------- */

rrl_status rrl_scale_build(const rrl_model* model, double q, rrl_target target, rrl_scale** out);
void rrl_scale_free(rrl_scale* scale);

/* "closed_form" or "talbot_inversion". */
rrl_status rrl_scale_backend(const rrl_scale* scale, char* buffer, size_t buffer_size);

/* Any output pointer may be NULL if the value is not needed. */
rrl_status rrl_scale_eval(const rrl_scale* scale, double x, double* w, double* w_prime,
                          double* w_bar, double* z, double* z_bar);

rrl_status rrl_scale_invert_laplace(const rrl_model* model, double q, rrl_target target, double x,
                                    double* out);

/* ---- identities ------------------------------------------------------ */

rrl_status rrl_context_new(const rrl_model* model, rrl_context** out);
void rrl_context_free(rrl_context* ctx);

/* Evaluate a named quantity with JSON parameters, e.g.
 *   rrl_identity_eval(ctx, "one_sided_exit", "{\"q\":0.5,\"x\":1,\"a\":2}", ...)
 * Output JSON: {"name":..., "params":..., "value":<number or "inf">,
 * "reason":..., "method":...}. */
rrl_status rrl_identity_eval(const rrl_context* ctx, const char* name, const char* params_json,
                             char** out_json);

/* JSON array of the accepted quantity names. */
rrl_status rrl_identity_names(char** out_json);

/* ---- simulation ------------------------------------------------------ */

/* config_json follows the sim-config schema (x0, a, q, p, n_paths, seed,
 * scheme, step, horizon_cap, band, threads). Returns the estimate set as
 * JSON. */
rrl_status rrl_simulate(const rrl_model* model, const char* config_json, char** out_json);

/* Per-path trace (CSV: path,t,V,L,R,event) for the first n_trace paths. */
rrl_status rrl_simulate_trace(const rrl_model* model, const char* config_json, int n_trace,
                              char** out_csv);

/* ---- verification ----------------------------------------------------- */

/* suite: analytic | lemma_pi | degeneracy | mc_small | mc_full.
 * options_json (optional, may be NULL): {"seed":..., "n_paths":...,
 * "threads":...}. all_passed receives 1 when every check passed. */
rrl_status rrl_verify(const rrl_model* model, const char* suite, const char* options_json,
                      char** out_report_json, char** out_summary, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* RRLEVY_H */

/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface of the nekho library. All objects are opaque handles; every
 * call returns an nk_status and details of the last failure on the calling
 * thread are available from nk_last_error(). Strings returned through
 * char** out-parameters are owned by the caller and released with
 * nk_string_free().
 */
#ifndef NEKHO_H
#define NEKHO_H

#include <stddef.h>
#include <stdint.h>

#if defined(NEKHO_BUILDING_LIBRARY)
#define NK_API __attribute__((visibility("default")))
#else
#define NK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nk_status {
  NK_OK = 0,
  NK_ERR_INVALID_ARGUMENT = 1,
  NK_ERR_DOMAIN = 2,
  NK_ERR_RESOURCE = 3,
  NK_ERR_CONFIG = 4,
  NK_ERR_IO = 5,
  NK_ERR_NUMERICAL = 6,
  NK_ERR_INTERNAL = 99
} nk_status;

typedef struct nk_config nk_config;
typedef struct nk_lattice nk_lattice;

NK_API const char* nk_version(void);
NK_API const char* nk_last_error(void);
NK_API void nk_string_free(char* s);

/* ---- configuration ---- */
NK_API nk_status nk_config_load(const char* path, nk_config** out);
NK_API nk_status nk_config_parse(const char* json_text, nk_config** out);
NK_API nk_status nk_config_preset(const char* name, nk_config** out);
/* "section.key=value"; value is JSON or a bare string. */
NK_API nk_status nk_config_override(nk_config* cfg, const char* assignment);
NK_API nk_status nk_config_dump(const nk_config* cfg, char** json_out);
NK_API nk_status nk_config_hash(const nk_config* cfg, uint64_t* hash_out);
NK_API void nk_config_free(nk_config* cfg);

/* Run a command ("lattice", "partition", "verify", ...). exit_code is 0 when
 * every asserted invariant held and 1 otherwise; summary_json (may be NULL)
 * receives the JSON summary. */
NK_API nk_status nk_run(const nk_config* cfg, const char* command, int* exit_code, char** summary_json);
NK_API nk_status nk_command_names(char** json_out);

/* ---- lattice ---- */
NK_API nk_status nk_lattice_from_config(const nk_config* cfg, nk_lattice** out);
NK_API size_t nk_lattice_size(const nk_lattice* lat);
NK_API int nk_lattice_dim(const nk_lattice* lat);
/* coords must hold dim doubles */
NK_API nk_status nk_lattice_point(const nk_lattice* lat, size_t id, double* coords);
NK_API void nk_lattice_free(nk_lattice* lat);

/* ---- direct numerics ---- */
NK_API nk_status nk_arnold_determinant_quadratic(const double* G, int dim, const double* a, double* out);
NK_API nk_status nk_counterexample_sobolev(double eps, int n, double t, int K, double s, double* out);
NK_API nk_status nk_anharmonic_a1(double E, double L, int ell, double* out);
NK_API nk_status nk_sphere_a1(double E, double p_phi, double* out);

#ifdef __cplusplus
}
#endif

#endif /* NEKHO_H */

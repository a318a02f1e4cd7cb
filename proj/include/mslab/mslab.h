/* Copyright 2026 mslab developers
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the mslab shared library. Every function returns an
 * mslab_status; on failure mslab_last_error() describes the problem for the
 * calling thread. Handles are opaque and owned by the caller, who releases
 * them with the matching *_free function. Strings returned through char**
 * are released with mslab_string_free.
 */
#ifndef MSLAB_MSLAB_H
#define MSLAB_MSLAB_H

#include <stddef.h>

#if defined(_WIN32)
#define MSLAB_API __declspec(dllexport)
#else
#define MSLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mslab_status {
  MSLAB_OK = 0,
  MSLAB_ERR_INVALID_ARGUMENT = 1, /* null pointer, size mismatch */
  MSLAB_ERR_CONFIG = 2,           /* malformed or out-of-range configuration */
  MSLAB_ERR_HYPOTHESIS = 3,       /* theorem hypotheses not met */
  MSLAB_ERR_IO = 4,
  MSLAB_ERR_RESOURCE = 5, /* work above a size limit */
  MSLAB_ERR_PARSE = 6,    /* symbol expression syntax */
  MSLAB_ERR_INTERNAL = 7
} mslab_status;

typedef enum mslab_window_mode {
  MSLAB_WINDOWS_DYADIC = 0, /* dyadic side lengths, all translates */
  MSLAB_WINDOWS_ALL = 1     /* every side length, all translates */
} mslab_window_mode;

typedef struct mslab_grid mslab_grid_t;
typedef struct mslab_field mslab_field_t;
typedef struct mslab_symbol mslab_symbol_t;

/* Log-spaced dt/t quadrature on [t_min, t_max]. */
typedef struct mslab_tquad {
  double t_min;
  double t_max;
  int nodes_per_octave;
} mslab_tquad;

typedef struct mslab_window {
  int corner[2];
  int side;
} mslab_window;

MSLAB_API const char* mslab_last_error(void);
MSLAB_API const char* mslab_version(void);
MSLAB_API void mslab_string_free(char* s);
/* FNV-1a 64-bit digest of text as 16 lowercase hex digits plus NUL. */
MSLAB_API mslab_status mslab_hash_text(const char* text, char out[17]);

/* Grids and fields. */
MSLAB_API mslab_status mslab_grid_create(int dim, int n, double box_length, mslab_grid_t** out);
MSLAB_API void mslab_grid_free(mslab_grid_t* g);
MSLAB_API mslab_status mslab_grid_info(const mslab_grid_t* g, int* dim, int* n, double* box_length);

/* im may be null for real data. re and im hold N^dim values. */
MSLAB_API mslab_status mslab_field_create(const mslab_grid_t* g, const double* re, const double* im,
                                          mslab_field_t** out);
MSLAB_API void mslab_field_free(mslab_field_t* f);
MSLAB_API mslab_status mslab_field_size(const mslab_field_t* f, size_t* size);
MSLAB_API mslab_status mslab_field_values(const mslab_field_t* f, double* re, double* im);
MSLAB_API mslab_status mslab_field_grid(const mslab_field_t* f, mslab_grid_t** out);
MSLAB_API mslab_status mslab_field_read(const char* path, mslab_field_t** out);
MSLAB_API mslab_status mslab_field_write(const mslab_field_t* f, const char* path);
MSLAB_API mslab_status mslab_field_write_csv(const mslab_field_t* f, const char* path);
/* w may be null (unit weight). */
MSLAB_API mslab_status mslab_lp_norm(const mslab_field_t* f, double p, const mslab_field_t* w,
                                     double* out);
MSLAB_API mslab_status mslab_weak_lp_quasinorm(const mslab_field_t* f, double p,
                                               const mslab_field_t* w, double* out);

/* Symbols: "gauss_bump", "rational_bump:k=4", "expr:<source>". arity_hint 0
 * accepts either arity. */
MSLAB_API mslab_status mslab_symbol_parse(const char* spec, int arity_hint, mslab_symbol_t** out);
MSLAB_API void mslab_symbol_free(mslab_symbol_t* m);
MSLAB_API mslab_status mslab_symbol_arity(const mslab_symbol_t* m, int* arity);
/* xi2 is ignored for unilinear symbols and may be null. */
MSLAB_API mslab_status mslab_symbol_eval(const mslab_symbol_t* m, const double xi1[2],
                                         const double xi2[2], double* re, double* im);
/* Condition report as JSON. cond is one of eq13, eq21, eq152, eq153 (symbol
 * side) or H2, H3, XY-smooth (kernel side, bilinear dim 1). */
MSLAB_API mslab_status mslab_check_condition(const mslab_symbol_t* m, const char* cond, int dim,
                                             int s, double eps1, double eps2, double p0,
                                             char** json_out);

/* Square functions. fields holds count = arity inputs on one grid; tquad may
 * be null for the grid default. */
MSLAB_API mslab_status mslab_default_tquad(const mslab_grid_t* g, mslab_tquad* out);
MSLAB_API mslab_status mslab_square_multiplier(const mslab_symbol_t* m,
                                               const mslab_field_t* const* fields, size_t count,
                                               const mslab_tquad* tquad, mslab_field_t** out);
MSLAB_API mslab_status mslab_square_kernel(const mslab_symbol_t* m,
                                           const mslab_field_t* const* fields, size_t count,
                                           const mslab_tquad* tquad, mslab_field_t** out);
/* kernel_route 0 evaluates through multipliers, 1 through kernel sums. */
MSLAB_API mslab_status mslab_commutator(const mslab_symbol_t* m, const mslab_field_t* const* b,
                                        const mslab_field_t* const* fields, size_t count,
                                        const mslab_tquad* tquad, int kernel_route,
                                        mslab_field_t** out);
MSLAB_API mslab_status mslab_square_identity_check(const mslab_symbol_t* m,
                                                   const mslab_field_t* f1,
                                                   const mslab_field_t* f2,
                                                   const mslab_tquad* tquad, double* out);
/* Annulus quantities for bilinear dim-1 symbols; mesh <= 0 selects 64. */
MSLAB_API mslab_status mslab_estimate_ajk(const mslab_symbol_t* m, double center, double half_side,
                                          double x, double xbar, int j, int k, double p, int mesh,
                                          double* out);
MSLAB_API mslab_status mslab_estimate_bjk(const mslab_symbol_t* m, double center, double half_side,
                                          int j, int k, double p, int mesh, double* out);

/* Maximal functions over lattice windows (no wrap). */
MSLAB_API mslab_status mslab_maximal_hl(const mslab_field_t* f, mslab_window_mode mode,
                                        mslab_field_t** out);
MSLAB_API mslab_status mslab_maximal_p(const mslab_field_t* const* fields, size_t count, double p0,
                                       mslab_window_mode mode, mslab_field_t** out);
MSLAB_API mslab_status mslab_m_delta(const mslab_field_t* f, double delta, mslab_window_mode mode,
                                     mslab_field_t** out);
MSLAB_API mslab_status mslab_sharp_maximal(const mslab_field_t* f, double delta,
                                           mslab_window_mode mode, mslab_field_t** out);
MSLAB_API mslab_status mslab_orlicz_maximal(const mslab_field_t* const* fields, size_t count,
                                            size_t slot, double p0, mslab_window_mode mode,
                                            mslab_field_t** out);

/* Weights. spec: "unit", "constant:c=4", "power:a=-0.5[,x0=..,x1=..]". */
MSLAB_API mslab_status mslab_weight_from_spec(const mslab_grid_t* g, const char* spec,
                                              mslab_field_t** out);
/* spec: "zero", "constant:c=2", "log", "cos:k=1". */
MSLAB_API mslab_status mslab_bmo_function_from_spec(const mslab_grid_t* g, const char* spec,
                                                    mslab_field_t** out);
/* p > 1 gives A_p; p == 1 gives the A_1 variant. argmax may be null. */
MSLAB_API mslab_status mslab_ap_characteristic(const mslab_field_t* w, double p,
                                               mslab_window_mode mode, double* out,
                                               mslab_window* argmax);
MSLAB_API mslab_status mslab_multi_ap_characteristic(const mslab_field_t* const* w, size_t count,
                                                     const double* p_list, double p0,
                                                     mslab_window_mode mode, double* out);
MSLAB_API mslab_status mslab_nu_weight(const mslab_field_t* const* w, size_t count,
                                       const double* p_list, mslab_field_t** out);
MSLAB_API mslab_status mslab_bmo_norm(const mslab_field_t* b, mslab_window_mode mode, double* out);

/* Young functions: kind is phi, phi0, phi1 or phibar1. */
MSLAB_API mslab_status mslab_young_eval(const char* kind, double alpha, double t, double* out);
MSLAB_API mslab_status mslab_luxemburg_norm(const double* samples, size_t count, const char* kind,
                                            double alpha, double* out);

/* Verification harness. config_json null selects the built-in config of the
 * theorem; out_dir null skips writing files; report_json may be null. */
MSLAB_API mslab_status mslab_builtin_config(const char* theorem_id, char** json_out);
MSLAB_API mslab_status mslab_verify(const char* theorem_id, const char* config_json,
                                    const char* out_dir, char** report_json);
/* Summary recomputed from the records of a report.json document, as JSON. */
MSLAB_API mslab_status mslab_report_summary(const char* report_json, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* MSLAB_MSLAB_H */

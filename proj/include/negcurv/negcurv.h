#ifndef NEGCURV_NEGCURV_H
#define NEGCURV_NEGCURV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(NEGCURV_BUILDING)
#define NCV_API __declspec(dllexport)
#else
#define NCV_API __declspec(dllimport)
#endif
#else
#define NCV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ncv_status {
  NCV_OK = 0,
  NCV_INVALID_ARGUMENT = 1,
  NCV_DOMAIN = 2,
  NCV_TRUNCATION = 3,
  NCV_DEGENERATE = 4,
  NCV_CONVERGENCE = 5,
  NCV_KIND_MISMATCH = 6,
  NCV_IO = 7,
  NCV_SCHEMA = 8,
  NCV_INTERNAL = 9
} ncv_status;

typedef enum ncv_format { NCV_FORMAT_CSV = 0, NCV_FORMAT_JSON = 1 } ncv_format;

typedef enum ncv_path { NCV_CLOSED_FORM = 0, NCV_FINITE_DIFFERENCE = 1 } ncv_path;

typedef struct ncv_space ncv_space;
typedef struct ncv_config ncv_config;
typedef struct ncv_result ncv_result;

typedef struct ncv_row {
  size_t index;
  const char* quantity;
  const char* relation; /* "<=", ">=", "<", ">", or "" for reported values */
  double r;
  const double* point;
  size_t point_dim;
  double measured;
  double bound; /* NaN when nothing is asserted */
  double margin;
  int ok;
} ncv_row;

typedef struct ncv_check {
  const char* name;
  const char* relation;
  double worst;
  double bound;
  double margin;
  int passed;
  size_t worst_index;
  const double* worst_point;
  size_t point_dim;
} ncv_check;

NCV_API const char* ncv_version(void);
NCV_API const char* ncv_convention(void);
NCV_API const char* ncv_status_name(ncv_status status);
/* Message of the last failed call on this thread; "" after a success. */
NCV_API const char* ncv_last_error(void);

/* Model spaces. kind: "euclidean", "hyperbolic", "chn" (dim = complex
   dimension) or "warped". Points and vectors are arrays of ncv_space_dim
   doubles; matrices are row-major. */
NCV_API ncv_status ncv_space_create(const char* kind, int dim, ncv_space** out);
NCV_API void ncv_space_free(ncv_space* space);
NCV_API int ncv_space_dim(const ncv_space* space);
NCV_API double ncv_space_chart_radius(const ncv_space* space);
NCV_API ncv_status ncv_space_metric(const ncv_space* space, const double* x, double* g);
NCV_API ncv_status ncv_space_distance(const ncv_space* space, const double* x, double* r);
NCV_API ncv_status ncv_space_exp(const ncv_space* space, const double* v, double* x);
NCV_API ncv_status ncv_sectional_curvature(const ncv_space* space, const double* x, const double* u,
                                           const double* v, ncv_path path, double* value);
NCV_API ncv_status ncv_form_norm(const ncv_space* space, int degree, const double* x, const double* components,
                                 double* value);

/* Primitive of the volume form (or of the Kaehler form on chn) based at the
   chart origin: components of Phi at x, C(m, k-1) doubles. */
NCV_API ncv_status ncv_volume_primitive(const ncv_space* space, const double* x, double* phi);
NCV_API ncv_status ncv_kaehler_primitive(const ncv_space* space, const double* x, double* phi);
NCV_API ncv_status ncv_sinh_ratio_bound(int k, double r, double* value);

/* Contact structure on chn. */
NCV_API ncv_status ncv_beta(const ncv_space* space, const double* x, double* beta);
NCV_API ncv_status ncv_hessian_r(const ncv_space* space, const double* x, const double* X, ncv_path path,
                                 double* value);
NCV_API ncv_status ncv_levi(const ncv_space* space, const double* x, const double* X, double* value);
NCV_API ncv_status ncv_contact_defect(const ncv_space* space, const double* x, ncv_path path, double* value);

/* Experiment configuration. Keys and values follow the JSON config file;
   values are parsed as JSON, falling back to a plain string. */
NCV_API ncv_status ncv_config_create(ncv_config** out);
NCV_API ncv_status ncv_config_parse(const char* json_text, ncv_config** out);
NCV_API ncv_status ncv_config_load(const char* path, ncv_config** out);
NCV_API void ncv_config_free(ncv_config* config);
NCV_API ncv_status ncv_config_set(ncv_config* config, const char* key, const char* value);
/* NCV_OK or NCV_INVALID_ARGUMENT with every problem in ncv_last_error. */
NCV_API ncv_status ncv_config_validate(const ncv_config* config);
/* Hash and canonical JSON stay valid until the config is next modified. */
NCV_API const char* ncv_config_hash(ncv_config* config);
NCV_API const char* ncv_config_json(ncv_config* config);
NCV_API const char* ncv_config_out(const ncv_config* config);
NCV_API ncv_format ncv_config_format(const ncv_config* config);
/* Real dimension of the chart the experiment runs on, or 0 if invalid. */
NCV_API int ncv_config_point_dim(const ncv_config* config);

NCV_API ncv_status ncv_run(const ncv_config* config, ncv_result** out);
/* Re-evaluates the sample at point (a direction for the horizon experiment). */
NCV_API ncv_status ncv_replay(const ncv_config* config, const double* point, size_t n, ncv_result** out);
NCV_API void ncv_result_free(ncv_result* result);

NCV_API int ncv_result_passed(const ncv_result* result);
NCV_API const char* ncv_result_experiment_id(const ncv_result* result);
NCV_API const char* ncv_result_config_hash(const ncv_result* result);
NCV_API double ncv_result_wall_time(const ncv_result* result);
NCV_API const char* ncv_result_summary(ncv_result* result);
NCV_API const char* ncv_result_json(ncv_result* result);
NCV_API const char* ncv_result_csv(ncv_result* result);
NCV_API size_t ncv_result_row_count(const ncv_result* result);
NCV_API ncv_status ncv_result_row(const ncv_result* result, size_t i, ncv_row* row);
NCV_API size_t ncv_result_check_count(const ncv_result* result);
NCV_API ncv_status ncv_result_check(const ncv_result* result, size_t i, ncv_check* check);
NCV_API size_t ncv_result_statistic_count(const ncv_result* result);
NCV_API ncv_status ncv_result_statistic(const ncv_result* result, size_t i, const char** name, double* value);
NCV_API ncv_status ncv_result_statistic_by_name(const ncv_result* result, const char* name, double* value);
/* Largest relative difference of check values and statistics; +inf when the
   records do not have the same entries. */
NCV_API double ncv_summary_distance(const ncv_result* a, const ncv_result* b);
/* Atomic write. An existing file with another schema version is only
   replaced when force is nonzero. */
NCV_API ncv_status ncv_result_write(const ncv_result* result, const char* path, ncv_format format, int force);

#ifdef __cplusplus
}
#endif

#endif

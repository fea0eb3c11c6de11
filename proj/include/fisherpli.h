#ifndef FISHERPLI_H
#define FISHERPLI_H

#include <stddef.h>
#include <stdint.h>

#if defined(FPLI_BUILDING_LIBRARY)
#define FPLI_API __attribute__((visibility("default")))
#else
#define FPLI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fpli_status {
  FPLI_OK = 0,
  FPLI_ERR_INVALID_ARGUMENT = 1,
  FPLI_ERR_DOMAIN = 2,
  FPLI_ERR_NUMERICAL = 3,
  FPLI_ERR_SPHERE_EMPTY = 4,
  FPLI_ERR_UNSUPPORTED = 5,
  FPLI_ERR_CONFIG = 6,
  FPLI_ERR_IO = 7,
  FPLI_ERR_INTERNAL = 8
} fpli_status;

typedef enum fpli_integrator { FPLI_EULER = 0, FPLI_ADAMS_MOULTON = 1 } fpli_integrator;

/* Coordinates the sphere is computed in. NORMAL_VARIANCE is (mu, sigma^2)
   and applies to untruncated normal centers only. */
typedef enum fpli_chart { FPLI_CHART_NATURAL = 0, FPLI_CHART_NORMAL_VARIANCE = 1 } fpli_chart;

typedef enum fpli_path_status {
  FPLI_PATH_COMPLETE = 0,
  FPLI_PATH_TRUNCATED = 1,
  FPLI_PATH_FAILED = 2
} fpli_path_status;

typedef enum fpli_estimator { FPLI_REVERSE_IS = 0, FPLI_RESAMPLE = 1 } fpli_estimator;
typedef enum fpli_epli_mode { FPLI_EPLI_MEAN_SHIFT = 0, FPLI_EPLI_VARIANCE_SCALE = 1 } fpli_epli_mode;

typedef struct fpli_distribution fpli_distribution;
typedef struct fpli_geodesic fpli_geodesic;
typedef struct fpli_sphere fpli_sphere;
typedef struct fpli_model fpli_model;
typedef struct fpli_sample fpli_sample;
typedef struct fpli_curve fpli_curve;
typedef struct fpli_sobol fpli_sobol;

/* ---- library ---------------------------------------------------------- */

FPLI_API const char* fpli_version(void);
/* Message of the last failing call on this thread ("" when none). */
FPLI_API const char* fpli_last_error(void);
FPLI_API const char* fpli_status_name(fpli_status status);
/* Worker threads for parallel sections; 0 selects the hardware count. */
FPLI_API void fpli_set_threads(unsigned threads);
FPLI_API unsigned fpli_get_threads(void);

/* ---- distributions ---------------------------------------------------- */

/* family: trunc_normal, trunc_lognormal, trunc_gumbel, triangular, normal,
   uniform. Pass +-INFINITY for an open end. */
FPLI_API fpli_status fpli_distribution_create(const char* family, const double* theta, size_t n_theta, double lo,
                                              double hi, fpli_distribution** out);
FPLI_API fpli_status fpli_distribution_from_json(const char* json, fpli_distribution** out);
/* Writes NUL-terminated JSON into buf when cap suffices; *needed always gets
   the size including the terminator. */
FPLI_API fpli_status fpli_distribution_to_json(const fpli_distribution* d, char* buf, size_t cap, size_t* needed);
FPLI_API fpli_status fpli_distribution_clone(const fpli_distribution* d, fpli_distribution** out);
FPLI_API void fpli_distribution_free(fpli_distribution* d);

FPLI_API const char* fpli_distribution_family(const fpli_distribution* d);
FPLI_API size_t fpli_distribution_dimension(const fpli_distribution* d);
FPLI_API fpli_status fpli_distribution_theta(const fpli_distribution* d, double* theta, size_t cap);
FPLI_API fpli_status fpli_distribution_support(const fpli_distribution* d, double* lo, double* hi);

FPLI_API fpli_status fpli_pdf(const fpli_distribution* d, double x, double* out);
FPLI_API fpli_status fpli_cdf(const fpli_distribution* d, double x, double* out);
FPLI_API fpli_status fpli_quantile(const fpli_distribution* d, double u, double* out);
FPLI_API fpli_status fpli_sample_draw(const fpli_distribution* d, uint64_t seed, size_t n, double* out);
FPLI_API fpli_status fpli_score(const fpli_distribution* d, double x, double* out);
/* Row-major r x r matrix into out (capacity 4); r is written to *r. */
FPLI_API fpli_status fpli_fisher_information(const fpli_distribution* d, double* out, size_t* r);
FPLI_API fpli_status fpli_kl_divergence(const fpli_distribution* p, const fpli_distribution* q, int points,
                                        double* out);

/* ---- geodesics and spheres -------------------------------------------- */

FPLI_API fpli_status fpli_geodesic_integrate(const fpli_distribution* center, const double* p0, size_t r,
                                             fpli_integrator method, int n_steps, fpli_geodesic** out);
FPLI_API void fpli_geodesic_free(fpli_geodesic* g);
FPLI_API size_t fpli_geodesic_length(const fpli_geodesic* g);
FPLI_API size_t fpli_geodesic_dimension(const fpli_geodesic* g);
/* q and p need room for the dimension. */
FPLI_API fpli_status fpli_geodesic_step(const fpli_geodesic* g, size_t k, double* t, double* q, double* p,
                                        double* hamiltonian, double* drift);
FPLI_API fpli_path_status fpli_geodesic_status(const fpli_geodesic* g);
FPLI_API const char* fpli_geodesic_message(const fpli_geodesic* g);
FPLI_API double fpli_geodesic_max_drift(const fpli_geodesic* g);
FPLI_API double fpli_geodesic_measured_length(const fpli_geodesic* g);

/* out holds K * r momenta, row-major. */
FPLI_API fpli_status fpli_initial_momenta(const fpli_distribution* center, double delta, int k, double* out);
FPLI_API double fpli_gaussian_fisher_distance(double mu0, double sigma0, double mu1, double sigma1);

typedef struct fpli_sphere_options {
  int k;
  fpli_integrator method;
  int n_steps;
  fpli_chart chart;
} fpli_sphere_options;

FPLI_API void fpli_sphere_options_default(fpli_sphere_options* options);

typedef struct fpli_sphere_point_info {
  int direction_index;
  double angle;
  double theta[2]; /* natural parameters of the distribution reached */
  size_t dimension;
  fpli_path_status status;
  double measured_length;
  double max_abs_drift;
} fpli_sphere_point_info;

FPLI_API fpli_status fpli_sphere_create(const fpli_distribution* center, double delta,
                                        const fpli_sphere_options* options, fpli_sphere** out);
FPLI_API void fpli_sphere_free(fpli_sphere* s);
FPLI_API size_t fpli_sphere_size(const fpli_sphere* s);
FPLI_API size_t fpli_sphere_valid_count(const fpli_sphere* s);
FPLI_API fpli_status fpli_sphere_point(const fpli_sphere* s, size_t k, fpli_sphere_point_info* out);
FPLI_API fpli_status fpli_sphere_point_distribution(const fpli_sphere* s, size_t k, fpli_distribution** out);

/* ---- models and samples ----------------------------------------------- */

/* Return 0 on success and store the output in *y. */
typedef int (*fpli_model_fn)(const double* x, size_t d, void* user, double* y);

/* kind: "ishigami" or "flood". */
FPLI_API fpli_status fpli_model_builtin(const char* kind, fpli_model** out);
FPLI_API fpli_status fpli_model_callback(fpli_model_fn fn, void* user, fpli_model** out);
FPLI_API void fpli_model_free(fpli_model* m);
FPLI_API fpli_status fpli_model_evaluate(const fpli_model* m, const double* x, size_t d, double* y);
/* Reference input laws of a built-in kind; caller frees each handle. */
FPLI_API fpli_status fpli_model_default_inputs(const char* kind, fpli_distribution** out, size_t cap, size_t* d);

/* inputs is row-major n x d. */
FPLI_API fpli_status fpli_sample_create(const fpli_distribution* const* specs, size_t d, const double* inputs,
                                        const double* outputs, size_t n, fpli_sample** out);
FPLI_API fpli_status fpli_sample_generate(const fpli_model* model, const fpli_distribution* const* specs, size_t d,
                                          size_t n, uint64_t seed, fpli_sample** out);
FPLI_API fpli_status fpli_sample_load(const char* path, const fpli_distribution* const* specs, size_t d,
                                      fpli_sample** out);
FPLI_API fpli_status fpli_sample_save(const fpli_sample* s, const char* path);
FPLI_API void fpli_sample_free(fpli_sample* s);
FPLI_API size_t fpli_sample_size(const fpli_sample* s);
FPLI_API size_t fpli_sample_dimension(const fpli_sample* s);
FPLI_API fpli_status fpli_sample_outputs(const fpli_sample* s, double* out);
FPLI_API fpli_status fpli_sample_inputs(const fpli_sample* s, double* out);
FPLI_API fpli_status fpli_sample_input_distribution(const fpli_sample* s, size_t i, fpli_distribution** out);

/* ---- estimation ------------------------------------------------------- */

FPLI_API fpli_status fpli_empirical_quantile(const double* values, size_t n, double alpha, double* out);
FPLI_API fpli_status fpli_likelihood_ratios(const fpli_sample* s, size_t i, const fpli_distribution* perturbed,
                                            double* out);
FPLI_API fpli_status fpli_perturbed_quantile(const fpli_sample* s, size_t i, const fpli_distribution* perturbed,
                                             double alpha, double* quantile, size_t* exceed);
FPLI_API fpli_status fpli_pli(const fpli_sample* s, size_t i, const fpli_distribution* perturbed, double alpha,
                              double* out);

/* ---- OF-PLI ----------------------------------------------------------- */

typedef struct fpli_ofpli_options {
  double alpha;
  int k;
  fpli_integrator method;
  int n_steps;
  fpli_estimator estimator;
  int bootstrap;       /* 0 disables intervals */
  uint64_t seed;
  const fpli_model* model; /* required for FPLI_RESAMPLE */
} fpli_ofpli_options;

FPLI_API void fpli_ofpli_options_default(fpli_ofpli_options* options);

typedef struct fpli_level_info {
  double delta;
  double s_plus;
  double s_minus;
  int has_ci;
  double ci_lo_plus, ci_hi_plus, ci_lo_minus, ci_hi_minus;
  int admissible;
  size_t n_valid;
  size_t n_points;
  int argmax_index; /* -1 when no point qualified */
  int argmin_index;
} fpli_level_info;

typedef struct fpli_point_info {
  int direction_index;
  double angle;
  double theta[2];
  size_t dimension;
  int valid;
  double s;
  size_t exceed;
  int admissible;
} fpli_point_info;

FPLI_API fpli_status fpli_ofpli_curve(const fpli_sample* s, size_t i, const double* deltas, size_t n_deltas,
                                      const fpli_ofpli_options* options, fpli_curve** out);
/* Single level on a precomputed sphere (any chart). */
FPLI_API fpli_status fpli_ofpli_sphere(const fpli_sample* s, size_t i, const fpli_sphere* sphere,
                                       const fpli_ofpli_options* options, fpli_curve** out);
FPLI_API void fpli_curve_free(fpli_curve* c);
FPLI_API size_t fpli_curve_levels(const fpli_curve* c);
FPLI_API fpli_status fpli_curve_level(const fpli_curve* c, size_t level, fpli_level_info* out);
FPLI_API fpli_status fpli_curve_point(const fpli_curve* c, size_t level, size_t k, fpli_point_info* out);
/* Returns 1 and writes *delta when some level is admissible. */
FPLI_API int fpli_curve_delta_max(const fpli_curve* c, double* delta);
FPLI_API fpli_status fpli_curve_argmax(const fpli_curve* c, size_t level, fpli_distribution** out);
FPLI_API fpli_status fpli_curve_argmin(const fpli_curve* c, size_t level, fpli_distribution** out);

/* ---- E-PLI ------------------------------------------------------------ */

FPLI_API fpli_status fpli_epli_pdf(const fpli_distribution* d, double delta, double x, double* out);
/* s_out and admissible_out hold n_grid entries; model and seed only matter
   for FPLI_RESAMPLE. */
FPLI_API fpli_status fpli_epli_curve(const fpli_sample* s, size_t i, const double* grid, size_t n_grid,
                                     double alpha, fpli_epli_mode mode, fpli_estimator estimator,
                                     const fpli_model* model, uint64_t seed, double* s_out, int* admissible_out);

/* ---- Sobol ------------------------------------------------------------ */

typedef struct fpli_sobol_index {
  double first_order, total, target_first_order, target_total;
  double se_first_order, se_total, se_target_first_order, se_target_total;
} fpli_sobol_index;

/* With has_threshold = 0 the threshold is the alpha-quantile of the pooled
   base designs. */
FPLI_API fpli_status fpli_sobol_compute(const fpli_model* model, const fpli_distribution* const* specs, size_t d,
                                        size_t n_base, uint64_t seed, int has_threshold, double threshold,
                                        double alpha, fpli_sobol** out);
FPLI_API void fpli_sobol_free(fpli_sobol* s);
FPLI_API size_t fpli_sobol_dimension(const fpli_sobol* s);
FPLI_API fpli_status fpli_sobol_get(const fpli_sobol* s, size_t i, fpli_sobol_index* out);
FPLI_API double fpli_sobol_threshold(const fpli_sobol* s);
FPLI_API size_t fpli_sobol_warning_count(const fpli_sobol* s);
FPLI_API const char* fpli_sobol_warning(const fpli_sobol* s, size_t k);

#ifdef __cplusplus
}
#endif

#endif /* FISHERPLI_H */

#include "fisherpli.h"

#include <atomic>
#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "fisherpli/distributions.hpp"
#include "fisherpli/error.hpp"
#include "fisherpli/estimation.hpp"
#include "fisherpli/geometry.hpp"
#include "fisherpli/models.hpp"
#include "fisherpli/robustness.hpp"
#include "fisherpli/sensitivity.hpp"
#include "fisherpli/serialization.hpp"

using namespace fisherpli;

struct fpli_distribution {
  DistributionSpec spec;
};
struct fpli_geodesic {
  GeodesicPath path;
  std::size_t dimension;
};
struct fpli_sphere {
  FisherSphere sphere;
};
struct fpli_model {
  Model fn;
  std::optional<ModelKind> kind;  // set for built-in models
};
struct fpli_sample {
  IOSample sample;
};
struct fpli_curve {
  PliCurve curve;
};
struct fpli_sobol {
  SobolResult result;
};

namespace {

thread_local std::string g_last_error;
std::atomic<unsigned> g_threads{0};

Parallelism parallelism() { return Parallelism{g_threads.load()}; }

fpli_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return FPLI_ERR_INVALID_ARGUMENT;
    case ErrorKind::Domain: return FPLI_ERR_DOMAIN;
    case ErrorKind::Numerical: return FPLI_ERR_NUMERICAL;
    case ErrorKind::SphereEmpty: return FPLI_ERR_SPHERE_EMPTY;
    case ErrorKind::UnsupportedFamily: return FPLI_ERR_UNSUPPORTED;
    case ErrorKind::Config: return FPLI_ERR_CONFIG;
    case ErrorKind::Io: return FPLI_ERR_IO;
  }
  return FPLI_ERR_INTERNAL;
}

template <class F>
fpli_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return FPLI_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return FPLI_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FPLI_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FPLI_ERR_INTERNAL;
  }
}

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

template <class T>
void need(const T* p, const char* name) {
  if (p == nullptr) throw InvalidArgument(std::string(name) + " is null");
}

std::vector<DistributionSpec> spec_list(const fpli_distribution* const* specs, std::size_t d) {
  if (d > 0) need(specs, "specs");
  std::vector<DistributionSpec> out;
  out.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    need(specs[i], "specs[i]");
    out.push_back(specs[i]->spec);
  }
  return out;
}

Integrator integrator_of(fpli_integrator m) {
  if (m == FPLI_EULER) return Integrator::Euler;
  if (m == FPLI_ADAMS_MOULTON) return Integrator::AdamsMoulton;
  throw InvalidArgument("unknown integrator");
}

fpli_path_status path_status_of(PathStatus s) {
  switch (s) {
    case PathStatus::Complete: return FPLI_PATH_COMPLETE;
    case PathStatus::TruncatedAtBoundary: return FPLI_PATH_TRUNCATED;
    case PathStatus::Failed: return FPLI_PATH_FAILED;
  }
  return FPLI_PATH_FAILED;
}

void copy_theta(const ParamVector& theta, double* out, std::size_t* n) {
  out[0] = out[1] = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) out[k] = theta[k];
  *n = static_cast<std::size_t>(theta.size());
}

OfpliOptions ofpli_options(const fpli_ofpli_options* o) {
  fpli_ofpli_options defaults;
  fpli_ofpli_options_default(&defaults);
  if (o == nullptr) o = &defaults;
  OfpliOptions opt;
  opt.alpha = o->alpha;
  opt.sphere.K = o->k;
  opt.sphere.method = integrator_of(o->method);
  opt.sphere.n_steps = o->n_steps;
  opt.sphere.parallelism = parallelism();
  opt.bootstrap = o->bootstrap;
  if (o->bootstrap < 0) throw InvalidArgument("bootstrap must be >= 0");
  opt.seed = o->seed;
  if (o->estimator == FPLI_RESAMPLE) {
    opt.mode = EstimatorMode::DirectResample;
    if (o->model == nullptr) throw InvalidArgument("direct resampling requires a model");
    opt.resample = ResampleContext{o->model->fn, o->seed, parallelism()};
  } else if (o->estimator != FPLI_REVERSE_IS) {
    throw InvalidArgument("unknown estimator");
  }
  return opt;
}

const OfpliLevel& level_at(const fpli_curve* c, std::size_t level) {
  need(c, "curve");
  if (level >= c->curve.levels.size()) throw InvalidArgument("level index out of range");
  return c->curve.levels[level];
}

}  // namespace

extern "C" {

const char* fpli_version(void) { return FISHERPLI_VERSION; }
const char* fpli_last_error(void) { return g_last_error.c_str(); }

const char* fpli_status_name(fpli_status status) {
  switch (status) {
    case FPLI_OK: return "ok";
    case FPLI_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FPLI_ERR_DOMAIN: return "domain error";
    case FPLI_ERR_NUMERICAL: return "numerical failure";
    case FPLI_ERR_SPHERE_EMPTY: return "empty sphere";
    case FPLI_ERR_UNSUPPORTED: return "unsupported family";
    case FPLI_ERR_CONFIG: return "configuration error";
    case FPLI_ERR_IO: return "i/o error";
    case FPLI_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void fpli_set_threads(unsigned threads) { g_threads.store(threads); }
unsigned fpli_get_threads(void) { return parallelism().resolved(); }

// ---- distributions ----

fpli_status fpli_distribution_create(const char* family, const double* theta, size_t n_theta, double lo, double hi,
                                     fpli_distribution** out) {
  return guard([&] {
    need(family, "family");
    need(out, "out");
    if (n_theta > 2) throw DomainError("at most 2 parameters");
    if (n_theta > 0) need(theta, "theta");
    ParamVector t(static_cast<Eigen::Index>(n_theta));
    for (std::size_t k = 0; k < n_theta; ++k) t[static_cast<Eigen::Index>(k)] = theta[k];
    *out = new fpli_distribution{DistributionSpec(family_from_name(family), t, Support{lo, hi})};
  });
}

fpli_status fpli_distribution_from_json(const char* json, fpli_distribution** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = new fpli_distribution{spec_from_json(nlohmann::json::parse(json))};
  });
}

fpli_status fpli_distribution_to_json(const fpli_distribution* d, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    need(d, "distribution");
    const std::string text = spec_to_json(d->spec).dump();
    if (needed) *needed = text.size() + 1;
    if (buf != nullptr && cap >= text.size() + 1) std::memcpy(buf, text.c_str(), text.size() + 1);
    else if (buf != nullptr) throw InvalidArgument("buffer too small");
  });
}

fpli_status fpli_distribution_clone(const fpli_distribution* d, fpli_distribution** out) {
  return guard([&] {
    need(d, "distribution");
    need(out, "out");
    *out = new fpli_distribution{d->spec};
  });
}

void fpli_distribution_free(fpli_distribution* d) { delete d; }

const char* fpli_distribution_family(const fpli_distribution* d) {
  return d ? family_name(d->spec.family()).data() : "";
}

size_t fpli_distribution_dimension(const fpli_distribution* d) {
  return d ? static_cast<size_t>(d->spec.dimension()) : 0;
}

fpli_status fpli_distribution_theta(const fpli_distribution* d, double* theta, size_t cap) {
  return guard([&] {
    need(d, "distribution");
    const auto n = static_cast<std::size_t>(d->spec.dimension());
    if (n > 0) need(theta, "theta");
    if (cap < n) throw InvalidArgument("theta buffer too small");
    for (std::size_t k = 0; k < n; ++k) theta[k] = d->spec.theta()[static_cast<Eigen::Index>(k)];
  });
}

fpli_status fpli_distribution_support(const fpli_distribution* d, double* lo, double* hi) {
  return guard([&] {
    need(d, "distribution");
    if (lo) *lo = d->spec.support().lo;
    if (hi) *hi = d->spec.support().hi;
  });
}

fpli_status fpli_pdf(const fpli_distribution* d, double x, double* out) {
  return guard([&] {
    need(d, "distribution");
    need(out, "out");
    *out = pdf(d->spec, x);
  });
}

fpli_status fpli_cdf(const fpli_distribution* d, double x, double* out) {
  return guard([&] {
    need(d, "distribution");
    need(out, "out");
    *out = cdf(d->spec, x);
  });
}

fpli_status fpli_quantile(const fpli_distribution* d, double u, double* out) {
  return guard([&] {
    need(d, "distribution");
    need(out, "out");
    *out = quantile(d->spec, u);
  });
}

fpli_status fpli_sample_draw(const fpli_distribution* d, uint64_t seed, size_t n, double* out) {
  return guard([&] {
    need(d, "distribution");
    if (n > 0) need(out, "out");
    const auto xs = sample(d->spec, seed, n);
    std::copy(xs.begin(), xs.end(), out);
  });
}

fpli_status fpli_score(const fpli_distribution* d, double x, double* out) {
  return guard([&] {
    need(d, "distribution");
    need(out, "out");
    const ParamVector s = score(d->spec, x);
    for (Eigen::Index k = 0; k < s.size(); ++k) out[k] = s[k];
  });
}

fpli_status fpli_fisher_information(const fpli_distribution* d, double* out, size_t* r) {
  return guard([&] {
    need(d, "distribution");
    need(out, "out");
    const ParamMatrix m = fisher_information(d->spec).matrix;
    const auto n = static_cast<std::size_t>(m.rows());
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        out[a * n + b] = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    if (r) *r = n;
  });
}

fpli_status fpli_kl_divergence(const fpli_distribution* p, const fpli_distribution* q, int points, double* out) {
  return guard([&] {
    need(p, "p");
    need(q, "q");
    need(out, "out");
    *out = kl_divergence(p->spec, q->spec, points);
  });
}

// ---- geodesics and spheres ----

fpli_status fpli_geodesic_integrate(const fpli_distribution* center, const double* p0, size_t r,
                                    fpli_integrator method, int n_steps, fpli_geodesic** out) {
  return guard([&] {
    need(center, "center");
    need(p0, "p0");
    need(out, "out");
    if (r != static_cast<std::size_t>(center->spec.dimension()))
      throw DomainError("momentum dimension does not match the family");
    ParamVector p(static_cast<Eigen::Index>(r));
    for (std::size_t k = 0; k < r; ++k) p[static_cast<Eigen::Index>(k)] = p0[k];
    *out = new fpli_geodesic{integrate_geodesic(center->spec, p, integrator_of(method), n_steps), r};
  });
}

void fpli_geodesic_free(fpli_geodesic* g) { delete g; }
size_t fpli_geodesic_length(const fpli_geodesic* g) { return g ? g->path.steps.size() : 0; }
size_t fpli_geodesic_dimension(const fpli_geodesic* g) { return g ? g->dimension : 0; }

fpli_status fpli_geodesic_step(const fpli_geodesic* g, size_t k, double* t, double* q, double* p,
                               double* hamiltonian, double* drift) {
  return guard([&] {
    need(g, "geodesic");
    if (k >= g->path.steps.size()) throw InvalidArgument("step index out of range");
    const GeodesicStep& s = g->path.steps[k];
    if (t) *t = s.t;
    for (Eigen::Index j = 0; j < s.q.size(); ++j) {
      if (q) q[j] = s.q[j];
      if (p) p[j] = s.p[j];
    }
    if (hamiltonian) *hamiltonian = s.hamiltonian;
    if (drift) *drift = s.drift;
  });
}

fpli_path_status fpli_geodesic_status(const fpli_geodesic* g) {
  return g ? path_status_of(g->path.status) : FPLI_PATH_FAILED;
}
const char* fpli_geodesic_message(const fpli_geodesic* g) { return g ? g->path.message.c_str() : ""; }
double fpli_geodesic_max_drift(const fpli_geodesic* g) { return g ? g->path.max_abs_drift() : NAN; }
double fpli_geodesic_measured_length(const fpli_geodesic* g) { return g ? g->path.measured_length() : NAN; }

fpli_status fpli_initial_momenta(const fpli_distribution* center, double delta, int k, double* out) {
  return guard([&] {
    need(center, "center");
    need(out, "out");
    const auto ps = initial_momenta(center->spec, delta, k);
    std::size_t idx = 0;
    for (const auto& p : ps)
      for (Eigen::Index j = 0; j < p.size(); ++j) out[idx++] = p[j];
  });
}

double fpli_gaussian_fisher_distance(double mu0, double sigma0, double mu1, double sigma1) {
  try {
    return gaussian_fisher_distance(mu0, sigma0, mu1, sigma1);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NAN;
  }
}

void fpli_sphere_options_default(fpli_sphere_options* options) {
  if (options == nullptr) return;
  options->k = 100;
  options->method = FPLI_ADAMS_MOULTON;
  options->n_steps = kDefaultSteps;
  options->chart = FPLI_CHART_NATURAL;
}

fpli_status fpli_sphere_create(const fpli_distribution* center, double delta, const fpli_sphere_options* options,
                               fpli_sphere** out) {
  return guard([&] {
    need(center, "center");
    need(out, "out");
    fpli_sphere_options o;
    fpli_sphere_options_default(&o);
    if (options) o = *options;
    SphereOptions so{o.k, integrator_of(o.method), o.n_steps, parallelism()};
    if (o.chart == FPLI_CHART_NATURAL) {
      *out = new fpli_sphere{fisher_sphere(center->spec, delta, so)};
    } else if (o.chart == FPLI_CHART_NORMAL_VARIANCE) {
      if (center->spec.family() != FamilyTag::Normal)
        throw UnsupportedFamilyError("the (mu, variance) chart applies to untruncated normal laws only");
      ParamVector q0(2);
      q0 << center->spec.theta()[0], center->spec.theta()[1] * center->spec.theta()[1];
      *out = new fpli_sphere{fisher_sphere(normal_variance_chart(), q0, delta, so)};
    } else {
      throw InvalidArgument("unknown chart");
    }
  });
}

void fpli_sphere_free(fpli_sphere* s) { delete s; }
size_t fpli_sphere_size(const fpli_sphere* s) { return s ? s->sphere.points.size() : 0; }
size_t fpli_sphere_valid_count(const fpli_sphere* s) { return s ? s->sphere.valid_count() : 0; }

fpli_status fpli_sphere_point(const fpli_sphere* s, size_t k, fpli_sphere_point_info* out) {
  return guard([&] {
    need(s, "sphere");
    need(out, "out");
    if (k >= s->sphere.points.size()) throw InvalidArgument("point index out of range");
    const SpherePoint& p = s->sphere.points[k];
    out->direction_index = p.direction_index;
    out->angle = p.angle;
    // Report natural parameters whatever chart the sphere was computed in.
    ParamVector theta = p.theta;
    try {
      theta = s->sphere.point_spec(k).theta();
    } catch (const Error&) {
      // endpoint outside the domain: keep chart coordinates
    }
    copy_theta(theta, out->theta, &out->dimension);
    out->status = path_status_of(p.status);
    out->measured_length = p.measured_length;
    out->max_abs_drift = p.max_abs_drift;
  });
}

fpli_status fpli_sphere_point_distribution(const fpli_sphere* s, size_t k, fpli_distribution** out) {
  return guard([&] {
    need(s, "sphere");
    need(out, "out");
    if (k >= s->sphere.points.size()) throw InvalidArgument("point index out of range");
    *out = new fpli_distribution{s->sphere.point_spec(k)};
  });
}

// ---- models and samples ----

fpli_status fpli_model_builtin(const char* kind, fpli_model** out) {
  return guard([&] {
    need(kind, "kind");
    need(out, "out");
    const ModelKind k = model_kind_from_name(kind);
    *out = new fpli_model{model_function(k), k};
  });
}

fpli_status fpli_model_callback(fpli_model_fn fn, void* user, fpli_model** out) {
  return guard([&] {
    if (fn == nullptr) throw InvalidArgument("callback is null");
    need(out, "out");
    *out = new fpli_model{[fn, user](std::span<const double> x) {
      double y = 0.0;
      if (fn(x.data(), x.size(), user, &y) != 0) throw DomainError("model callback reported failure");
      return y;
    }, std::nullopt};
  });
}

void fpli_model_free(fpli_model* m) { delete m; }

fpli_status fpli_model_evaluate(const fpli_model* m, const double* x, size_t d, double* y) {
  return guard([&] {
    need(m, "model");
    need(x, "x");
    need(y, "y");
    if (m->kind) ModelSpec{*m->kind, std::vector<DistributionSpec>(d, DistributionSpec::normal(0, 1)), {}}.validate();
    *y = m->fn(std::span<const double>(x, d));
  });
}

fpli_status fpli_model_default_inputs(const char* kind, fpli_distribution** out, size_t cap, size_t* d) {
  return guard([&] {
    need(kind, "kind");
    const ModelKind k = model_kind_from_name(kind);
    if (k == ModelKind::External) throw UnsupportedFamilyError("external models have no reference inputs");
    const auto specs = k == ModelKind::Ishigami ? ishigami_inputs() : flood_inputs();
    if (d) *d = specs.size();
    if (out == nullptr) return;
    if (cap < specs.size()) throw InvalidArgument("output array too small");
    for (std::size_t i = 0; i < specs.size(); ++i) out[i] = new fpli_distribution{specs[i]};
  });
}

fpli_status fpli_sample_create(const fpli_distribution* const* specs, size_t d, const double* inputs,
                               const double* outputs, size_t n, fpli_sample** out) {
  return guard([&] {
    need(out, "out");
    if (n > 0) {
      need(inputs, "inputs");
      need(outputs, "outputs");
    }
    *out = new fpli_sample{IOSample(spec_list(specs, d), std::vector<double>(inputs, inputs + n * d),
                                    std::vector<double>(outputs, outputs + n))};
  });
}

fpli_status fpli_sample_generate(const fpli_model* model, const fpli_distribution* const* specs, size_t d, size_t n,
                                 uint64_t seed, fpli_sample** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    auto list = spec_list(specs, d);
    if (model->kind) ModelSpec{*model->kind, list, {}}.validate();
    *out = new fpli_sample{generate_sample(model->fn, list, n, seed, parallelism())};
  });
}

fpli_status fpli_sample_load(const char* path, const fpli_distribution* const* specs, size_t d, fpli_sample** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new fpli_sample{load_sample(path, spec_list(specs, d))};
  });
}

fpli_status fpli_sample_save(const fpli_sample* s, const char* path) {
  return guard([&] {
    need(s, "sample");
    need(path, "path");
    save_sample(path, s->sample);
  });
}

void fpli_sample_free(fpli_sample* s) { delete s; }
size_t fpli_sample_size(const fpli_sample* s) { return s ? s->sample.size() : 0; }
size_t fpli_sample_dimension(const fpli_sample* s) { return s ? s->sample.dimension() : 0; }

fpli_status fpli_sample_outputs(const fpli_sample* s, double* out) {
  return guard([&] {
    need(s, "sample");
    if (!s->sample.empty()) need(out, "out");
    std::copy(s->sample.outputs().begin(), s->sample.outputs().end(), out);
  });
}

fpli_status fpli_sample_inputs(const fpli_sample* s, double* out) {
  return guard([&] {
    need(s, "sample");
    if (!s->sample.empty()) need(out, "out");
    std::copy(s->sample.inputs().begin(), s->sample.inputs().end(), out);
  });
}

fpli_status fpli_sample_input_distribution(const fpli_sample* s, size_t i, fpli_distribution** out) {
  return guard([&] {
    need(s, "sample");
    need(out, "out");
    if (i >= s->sample.dimension()) throw InvalidArgument("input index out of range");
    *out = new fpli_distribution{s->sample.input_specs()[i]};
  });
}

// ---- estimation ----

fpli_status fpli_empirical_quantile(const double* values, size_t n, double alpha, double* out) {
  return guard([&] {
    if (n > 0) need(values, "values");
    need(out, "out");
    *out = empirical_quantile(std::span<const double>(values, n), alpha);
  });
}

fpli_status fpli_likelihood_ratios(const fpli_sample* s, size_t i, const fpli_distribution* perturbed,
                                   double* out) {
  return guard([&] {
    need(s, "sample");
    need(perturbed, "perturbed");
    const auto r = likelihood_ratios(s->sample, i, perturbed->spec);
    if (!r.empty()) need(out, "out");
    std::copy(r.begin(), r.end(), out);
  });
}

fpli_status fpli_perturbed_quantile(const fpli_sample* s, size_t i, const fpli_distribution* perturbed,
                                    double alpha, double* quantile_out, size_t* exceed) {
  return guard([&] {
    need(s, "sample");
    need(perturbed, "perturbed");
    const PerturbedQuantile pq = perturbed_quantile(s->sample, i, perturbed->spec, alpha);
    if (quantile_out) *quantile_out = pq.quantile;
    if (exceed) *exceed = pq.exceed_count(tail_for(alpha));
  });
}

fpli_status fpli_pli(const fpli_sample* s, size_t i, const fpli_distribution* perturbed, double alpha, double* out) {
  return guard([&] {
    need(s, "sample");
    need(perturbed, "perturbed");
    need(out, "out");
    *out = pli(s->sample, i, perturbed->spec, alpha);
  });
}

// ---- OF-PLI ----

void fpli_ofpli_options_default(fpli_ofpli_options* options) {
  if (options == nullptr) return;
  options->alpha = 0.95;
  options->k = 100;
  options->method = FPLI_ADAMS_MOULTON;
  options->n_steps = kDefaultSteps;
  options->estimator = FPLI_REVERSE_IS;
  options->bootstrap = 0;
  options->seed = 0;
  options->model = nullptr;
}

fpli_status fpli_ofpli_curve(const fpli_sample* s, size_t i, const double* deltas, size_t n_deltas,
                             const fpli_ofpli_options* options, fpli_curve** out) {
  return guard([&] {
    need(s, "sample");
    need(out, "out");
    if (n_deltas > 0) need(deltas, "deltas");
    const std::vector<double> grid(deltas, deltas + n_deltas);
    *out = new fpli_curve{ofpli_curve(s->sample, i, grid, ofpli_options(options))};
  });
}

fpli_status fpli_ofpli_sphere(const fpli_sample* s, size_t i, const fpli_sphere* sphere,
                              const fpli_ofpli_options* options, fpli_curve** out) {
  return guard([&] {
    need(s, "sample");
    need(sphere, "sphere");
    need(out, "out");
    PliCurve curve;
    curve.input_index = i;
    curve.levels.push_back(ofpli_at_delta(s->sample, i, sphere->sphere, ofpli_options(options)));
    apply_admissibility_cutoff(curve);
    *out = new fpli_curve{std::move(curve)};
  });
}

void fpli_curve_free(fpli_curve* c) { delete c; }
size_t fpli_curve_levels(const fpli_curve* c) { return c ? c->curve.levels.size() : 0; }

fpli_status fpli_curve_level(const fpli_curve* c, size_t level, fpli_level_info* out) {
  return guard([&] {
    need(out, "out");
    const OfpliLevel& l = level_at(c, level);
    out->delta = l.delta;
    out->s_plus = l.s_plus;
    out->s_minus = l.s_minus;
    out->has_ci = l.ci_plus.has_value() ? 1 : 0;
    out->ci_lo_plus = l.ci_plus ? l.ci_plus->lo95 : NAN;
    out->ci_hi_plus = l.ci_plus ? l.ci_plus->hi95 : NAN;
    out->ci_lo_minus = l.ci_minus ? l.ci_minus->lo95 : NAN;
    out->ci_hi_minus = l.ci_minus ? l.ci_minus->hi95 : NAN;
    out->admissible = l.admissible ? 1 : 0;
    out->n_valid = l.n_valid;
    out->n_points = l.points.size();
    out->argmax_index = l.argmax_index;
    out->argmin_index = l.argmin_index;
  });
}

fpli_status fpli_curve_point(const fpli_curve* c, size_t level, size_t k, fpli_point_info* out) {
  return guard([&] {
    need(out, "out");
    const OfpliLevel& l = level_at(c, level);
    if (k >= l.points.size()) throw InvalidArgument("point index out of range");
    const SpherePli& p = l.points[k];
    out->direction_index = p.direction_index;
    out->angle = p.angle;
    copy_theta(p.theta, out->theta, &out->dimension);
    out->valid = p.valid ? 1 : 0;
    out->s = p.value;
    out->exceed = p.exceed;
    out->admissible = p.admissible ? 1 : 0;
  });
}

int fpli_curve_delta_max(const fpli_curve* c, double* delta) {
  if (c == nullptr || !c->curve.delta_max) return 0;
  if (delta) *delta = *c->curve.delta_max;
  return 1;
}

fpli_status fpli_curve_argmax(const fpli_curve* c, size_t level, fpli_distribution** out) {
  return guard([&] {
    need(out, "out");
    const OfpliLevel& l = level_at(c, level);
    if (!l.argmax) throw DomainError("no admissible point at this level");
    *out = new fpli_distribution{*l.argmax};
  });
}

fpli_status fpli_curve_argmin(const fpli_curve* c, size_t level, fpli_distribution** out) {
  return guard([&] {
    need(out, "out");
    const OfpliLevel& l = level_at(c, level);
    if (!l.argmin) throw DomainError("no admissible point at this level");
    *out = new fpli_distribution{*l.argmin};
  });
}

// ---- E-PLI ----

fpli_status fpli_epli_pdf(const fpli_distribution* d, double delta, double x, double* out) {
  return guard([&] {
    need(d, "distribution");
    need(out, "out");
    *out = epli_perturbed_density(d->spec, delta).pdf(x);
  });
}

fpli_status fpli_epli_curve(const fpli_sample* s, size_t i, const double* grid, size_t n_grid, double alpha,
                            fpli_epli_mode mode, fpli_estimator estimator, const fpli_model* model, uint64_t seed,
                            double* s_out, int* admissible_out) {
  return guard([&] {
    need(s, "sample");
    if (n_grid > 0) {
      need(grid, "grid");
      need(s_out, "s_out");
    }
    std::optional<ResampleContext> ctx;
    EstimatorMode em = EstimatorMode::ReverseIS;
    if (estimator == FPLI_RESAMPLE) {
      need(model, "model");
      em = EstimatorMode::DirectResample;
      ctx = ResampleContext{model->fn, seed, parallelism()};
    }
    const EpliMode m = mode == FPLI_EPLI_VARIANCE_SCALE ? EpliMode::VarianceScale : EpliMode::MeanShift;
    const auto pts = epli_curve(s->sample, i, std::vector<double>(grid, grid + n_grid), alpha, m, em, ctx);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      s_out[k] = pts[k].estimate.value;
      if (admissible_out) admissible_out[k] = pts[k].estimate.admissible ? 1 : 0;
    }
  });
}

// ---- Sobol ----

fpli_status fpli_sobol_compute(const fpli_model* model, const fpli_distribution* const* specs, size_t d,
                               size_t n_base, uint64_t seed, int has_threshold, double threshold, double alpha,
                               fpli_sobol** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    std::optional<double> t;
    if (has_threshold) t = threshold;
    auto list = spec_list(specs, d);
    if (model->kind) ModelSpec{*model->kind, list, {}}.validate();
    *out = new fpli_sobol{sobol_indices(model->fn, list, n_base, seed, t, alpha, parallelism())};
  });
}

void fpli_sobol_free(fpli_sobol* s) { delete s; }
size_t fpli_sobol_dimension(const fpli_sobol* s) { return s ? s->result.indices.size() : 0; }

fpli_status fpli_sobol_get(const fpli_sobol* s, size_t i, fpli_sobol_index* out) {
  return guard([&] {
    need(s, "sobol");
    need(out, "out");
    if (i >= s->result.indices.size()) throw InvalidArgument("input index out of range");
    const SobolIndex& x = s->result.indices[i];
    *out = {x.first_order,    x.total,    x.target_first_order,    x.target_total,
            x.se_first_order, x.se_total, x.se_target_first_order, x.se_target_total};
  });
}

double fpli_sobol_threshold(const fpli_sobol* s) {
  return s && s->result.threshold ? *s->result.threshold : NAN;
}
size_t fpli_sobol_warning_count(const fpli_sobol* s) { return s ? s->result.warnings.size() : 0; }
const char* fpli_sobol_warning(const fpli_sobol* s, size_t k) {
  return s && k < s->result.warnings.size() ? s->result.warnings[k].c_str() : "";
}

}  // extern "C"

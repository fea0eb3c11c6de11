#include "fisherpli/robustness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "fisherpli/error.hpp"
#include "fisherpli/random.hpp"

namespace fisherpli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double baseline_quantile(const SortedOutputs& sorted, double alpha) {
  const double q = sorted.empirical(alpha).quantile;
  if (q == 0.0) throw DomainError("nominal output quantile is zero; the relative index is undefined");
  return q;
}

std::size_t exceed_of(const PerturbedQuantile& pq, double alpha) { return pq.exceed_count(tail_for(alpha)); }

bool is_nominal(const PerturbedLaw& law, const DistributionSpec& nominal) {
  return law.spec.has_value() && *law.spec == nominal;
}

// Column i from the law, the others from their nominal laws.
std::vector<double> resampled_outputs(const IOSample& sample, std::size_t i, const PerturbedLaw& law,
                                      const ResampleContext& context, std::uint64_t stream) {
  const auto& specs = sample.input_specs();
  const std::size_t d = specs.size();
  const std::size_t n = sample.size();
  const std::uint64_t seed = derive_seed(context.seed, stream);
  std::vector<double> inputs = draw_inputs(specs, n, seed);
  Rng rng(derive_seed(seed, i));
  for (std::size_t r = 0; r < n; ++r) inputs[r * d + i] = law.quantile(rng.uniform());
  return evaluate_rows(context.model, inputs, d, context.parallelism);
}

PliEstimate estimate_from_outputs(std::span<const double> outputs, double baseline, double alpha) {
  const SortedOutputs sorted(outputs);
  const PerturbedQuantile pq = sorted.empirical(alpha);
  const std::size_t exceed = exceed_of(pq, alpha);
  return {(pq.quantile - baseline) / baseline, pq.quantile, baseline, exceed, admissible(exceed, alpha, tail_for(alpha))};
}

double quantile_of(std::vector<double>& values, double alpha) {
  const std::size_t n = values.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) * (1.0 - 1e-12)));
  k = std::clamp<std::size_t>(k, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end());
  return values[k - 1];
}

std::uint64_t delta_stream(std::size_t i, double delta) {
  return derive_seed(static_cast<std::uint64_t>(i), std::bit_cast<std::uint64_t>(delta));
}

}  // namespace

PerturbedLaw law_from_spec(const DistributionSpec& spec) {
  return {[spec](double x) { return pdf(spec, x); }, [spec](double u) { return quantile(spec, u); }, spec,
          describe(spec)};
}

std::string_view estimator_mode_name(EstimatorMode mode) noexcept {
  return mode == EstimatorMode::ReverseIS ? "reverse_is" : "resample";
}

EstimatorMode estimator_mode_from_name(std::string_view name) {
  if (name == "reverse_is") return EstimatorMode::ReverseIS;
  if (name == "resample") return EstimatorMode::DirectResample;
  throw DomainError("unknown estimator mode '" + std::string(name) + "' (expected reverse_is or resample)");
}

PliEstimate pli_estimate(const IOSample& sample, std::size_t i, const PerturbedLaw& law, double alpha) {
  const SortedOutputs sorted(sample.outputs());
  const double q0 = baseline_quantile(sorted, alpha);
  if (law.spec && !(law.spec->support() == sample.input_specs().at(i).support()))
    throw DomainError("perturbed law must share the nominal support");
  const auto ratios = likelihood_ratios(sample, i, law.pdf);
  const PerturbedQuantile pq = sorted.weighted_quantile(ratios, alpha);
  const std::size_t exceed = exceed_of(pq, alpha);
  return {(pq.quantile - q0) / q0, pq.quantile, q0, exceed, admissible(exceed, alpha, tail_for(alpha))};
}

double pli(const IOSample& sample, std::size_t i, const DistributionSpec& perturbed, double alpha) {
  return pli_estimate(sample, i, law_from_spec(perturbed), alpha).value;
}

PliEstimate pli_resample(const IOSample& sample, std::size_t i, const PerturbedLaw& law, double alpha,
                         const ResampleContext& context, std::uint64_t stream) {
  if (i >= sample.dimension()) throw DomainError("input index out of range");
  const SortedOutputs sorted(sample.outputs());
  const double q0 = baseline_quantile(sorted, alpha);
  if (is_nominal(law, sample.input_specs()[i])) return estimate_from_outputs(sample.outputs(), q0, alpha);
  const auto outputs = resampled_outputs(sample, i, law, context, stream);
  return estimate_from_outputs(outputs, q0, alpha);
}

OfpliLevel ofpli_at_delta(const IOSample& sample, std::size_t i, double delta, const OfpliOptions& options) {
  if (i >= sample.dimension()) throw DomainError("input index out of range");
  const DistributionSpec& nominal = sample.input_specs()[i];
  if (!has_fisher_structure(nominal.family()))
    throw UnsupportedFamilyError("input x" + std::to_string(i + 1) + " (" + std::string(family_name(nominal.family())) +
                                 ") has no Fisher structure");
  return ofpli_at_delta(sample, i, fisher_sphere(nominal, delta, options.sphere), options);
}

OfpliLevel ofpli_at_delta(const IOSample& sample, std::size_t i, const FisherSphere& sphere,
                          const OfpliOptions& options) {
  if (i >= sample.dimension()) throw DomainError("input index out of range");
  if (sample.empty()) throw DomainError("ofpli: empty sample");
  const bool direct = options.mode == EstimatorMode::DirectResample;
  if (direct && !options.resample) throw DomainError("direct resampling needs a model to re-run");
  const double alpha = options.alpha;
  const SortedOutputs sorted(sample.outputs());
  const double q0 = baseline_quantile(sorted, alpha);
  const DistributionSpec& nominal = sample.input_specs()[i];
  const std::size_t K = sphere.points.size();
  const bool keep = options.bootstrap > 0;

  OfpliLevel level;
  level.input_index = i;
  level.delta = sphere.radius;
  level.points.resize(K);
  std::vector<std::vector<double>> kept(keep ? K : 0);  // ratios (IS) or outputs (direct)
  const std::uint64_t stream = delta_stream(i, sphere.radius);

  // Direct resampling parallelizes inside the model evaluation instead.
  const Parallelism outer = direct ? Parallelism{1} : options.sphere.parallelism;
  parallel_for(K, outer, [&](std::size_t k) {
    const SpherePoint& sp = sphere.points[k];
    SpherePli& out = level.points[k];
    out.direction_index = sp.direction_index;
    out.angle = sp.angle;
    out.theta = sp.theta;
    out.valid = sp.valid();
    out.value = kNaN;
    out.exceed = 0;
    out.admissible = false;
    if (!out.valid) return;
    const DistributionSpec spec = sphere.point_spec(k);
    if (!(spec.support() == nominal.support()))
      throw DomainError("sphere point support differs from the nominal support");
    if (direct) {
      const PerturbedLaw law = law_from_spec(spec);
      std::vector<double> ys = is_nominal(law, nominal)
                                   ? std::vector<double>(sample.outputs().begin(), sample.outputs().end())
                                   : resampled_outputs(sample, i, law, *options.resample, derive_seed(stream, k));
      const PliEstimate e = estimate_from_outputs(ys, q0, alpha);
      out.value = e.value;
      out.exceed = e.exceed;
      out.admissible = e.admissible;
      if (keep) kept[k] = std::move(ys);
    } else {
      std::vector<double> ratios = likelihood_ratios(sample, i, spec);
      const PerturbedQuantile pq = sorted.weighted_quantile(ratios, alpha);
      out.value = (pq.quantile - q0) / q0;
      out.exceed = exceed_of(pq, alpha);
      out.admissible = admissible(out.exceed, alpha, tail_for(alpha));
      if (keep) kept[k] = std::move(ratios);
    }
  });

  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < K; ++k) {
    const SpherePli& p = level.points[k];
    if (!p.valid) continue;
    ++level.n_valid;
    if (!p.admissible) {
      level.admissible = false;
      continue;
    }
    used.push_back(k);
  }
  if (level.n_valid == 0) throw SphereEmptyError("no valid sphere point at delta = " + format_double(sphere.radius));
  if (used.empty()) {
    level.s_plus = level.s_minus = kNaN;
    return level;
  }
  std::size_t kmax = used.front(), kmin = used.front();
  for (std::size_t k : used) {
    if (level.points[k].value > level.points[kmax].value) kmax = k;
    if (level.points[k].value < level.points[kmin].value) kmin = k;
  }
  level.s_plus = level.points[kmax].value;
  level.s_minus = level.points[kmin].value;
  level.argmax_index = static_cast<int>(kmax);
  level.argmin_index = static_cast<int>(kmin);
  level.argmax = sphere.point_spec(kmax);
  level.argmin = sphere.point_spec(kmin);

  if (!keep) return level;
  const std::size_t n = sample.size();
  const std::size_t B = static_cast<std::size_t>(options.bootstrap);
  const std::uint64_t boot_seed = derive_seed(options.seed, 0xc1u, stream);
  std::vector<double> plus(B), minus(B);
  std::vector<char> ok(B, 0);
  parallel_for(B, options.sphere.parallelism, [&](std::size_t b) {
    const auto rows = bootstrap_rows(n, boot_seed, b);
    std::vector<double> yb(n);
    for (std::size_t r = 0; r < n; ++r) yb[r] = sample.outputs()[rows[r]];
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    if (direct) {
      const double base = quantile_of(yb, alpha);
      if (base == 0.0) return;
      std::vector<double> zb(n);
      for (std::size_t k : used) {
        const auto prow = bootstrap_rows(n, derive_seed(boot_seed, k + 1), b);
        for (std::size_t r = 0; r < n; ++r) zb[r] = kept[k][prow[r]];
        const double s = (quantile_of(zb, alpha) - base) / base;
        hi = std::max(hi, s);
        lo = std::min(lo, s);
      }
    } else {
      const SortedOutputs sb(yb);
      const double base = sb.empirical(alpha).quantile;
      if (base == 0.0) return;
      std::vector<double> rb(n);
      for (std::size_t k : used) {
        for (std::size_t r = 0; r < n; ++r) rb[r] = kept[k][rows[r]];
        double s;
        try {
          s = (sb.weighted_quantile(rb, alpha).quantile - base) / base;
        } catch (const NumericalError&) {
          continue;
        }
        hi = std::max(hi, s);
        lo = std::min(lo, s);
      }
    }
    if (!std::isfinite(hi) || !std::isfinite(lo)) return;
    plus[b] = hi;
    minus[b] = lo;
    ok[b] = 1;
  });
  level.ci_plus = summarize_replicates(plus, ok);
  level.ci_minus = summarize_replicates(minus, ok);
  return level;
}

void validate_delta_grid(const std::vector<double>& grid) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || !std::isfinite(grid[k])) throw DomainError("delta grid values must be positive");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw DomainError("delta grid must be strictly increasing");
  }
}

void apply_admissibility_cutoff(PliCurve& curve) {
  curve.delta_max.reset();
  bool failed = false;
  for (auto& level : curve.levels) {
    if (failed) level.admissible = false;
    if (!level.admissible) failed = true;
    if (!failed) curve.delta_max = level.delta;
  }
}

PliCurve ofpli_curve(const IOSample& sample, std::size_t i, const std::vector<double>& delta_grid,
                     const OfpliOptions& options) {
  validate_delta_grid(delta_grid);
  PliCurve curve;
  curve.input_index = i;
  for (double delta : delta_grid) curve.levels.push_back(ofpli_at_delta(sample, i, delta, options));
  apply_admissibility_cutoff(curve);
  return curve;
}

PerturbedLaw epli_perturbed_density(const DistributionSpec& spec, double delta) {
  if (!std::isfinite(delta)) throw DomainError("epli: delta must be finite");
  if (delta == 0.0) return law_from_spec(spec);
  PerturbedLaw law;
  law.pdf = [spec, delta](double x) {
    const double f = pdf(spec, x);
    if (f == 0.0) return 0.0;
    const double u = cdf(spec, x);
    if (u <= 0.0) return delta > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    if (u >= 1.0) return delta > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    const double z = normal_quantile(u);
    return std::exp(0.5 * (-delta * delta + 2.0 * delta * z)) * f;
  };
  law.quantile = [spec, delta](double u) {
    double v = normal_cdf(normal_quantile(u) + delta);
    v = std::clamp(v, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
    return quantile(spec, v);
  };
  std::ostringstream os;
  os << describe(spec) << " shifted by " << delta << " in standard space";
  law.label = os.str();
  return law;
}

std::string_view epli_mode_name(EpliMode mode) noexcept {
  return mode == EpliMode::MeanShift ? "mean_shift" : "variance_scale";
}

EpliMode epli_mode_from_name(std::string_view name) {
  if (name == "mean_shift" || name == "mean") return EpliMode::MeanShift;
  if (name == "variance_scale" || name == "variance") return EpliMode::VarianceScale;
  throw DomainError("unknown E-PLI mode '" + std::string(name) + "' (expected mean_shift or variance_scale)");
}

PerturbedLaw epli_variance_law(const DistributionSpec& spec, double v) {
  if (spec.family() != FamilyTag::Normal && spec.family() != FamilyTag::TruncNormal)
    throw UnsupportedFamilyError("variance perturbation is defined for Gaussian inputs only, got " +
                                 std::string(family_name(spec.family())));
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("variance scale must be positive");
  if (v == 1.0) return law_from_spec(spec);
  ParamVector theta = spec.theta();
  theta[1] *= std::sqrt(v);
  return law_from_spec(spec.with_theta(theta));
}

std::vector<EpliPoint> epli_curve(const IOSample& sample, std::size_t i, const std::vector<double>& grid,
                                  double alpha, EpliMode mode, EstimatorMode estimator,
                                  const std::optional<ResampleContext>& resample) {
  if (i >= sample.dimension()) throw DomainError("input index out of range");
  if (estimator == EstimatorMode::DirectResample && !resample)
    throw DomainError("direct resampling needs a model to re-run");
  const DistributionSpec& nominal = sample.input_specs()[i];
  std::vector<EpliPoint> out;
  out.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = grid[k];
    const PerturbedLaw law = mode == EpliMode::MeanShift ? epli_perturbed_density(nominal, v)
                                                         : epli_variance_law(nominal, v);
    const PliEstimate e =
        estimator == EstimatorMode::ReverseIS
            ? pli_estimate(sample, i, law, alpha)
            : pli_resample(sample, i, law, alpha, *resample,
                           derive_seed(0xe9u, static_cast<std::uint64_t>(i), std::bit_cast<std::uint64_t>(v)));
    out.push_back({v, e});
  }
  return out;
}

}  // namespace fisherpli

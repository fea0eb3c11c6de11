#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fisherpli/distributions.hpp"
#include "fisherpli/estimation.hpp"
#include "fisherpli/geometry.hpp"
#include "fisherpli/models.hpp"

namespace fisherpli {

/// A replacement law for one input: density plus inverse cdf. Built either
/// from a parametric spec or from the standard-space mean shift.
struct PerturbedLaw {
  std::function<double(double)> pdf;
  std::function<double(double)> quantile;
  std::optional<DistributionSpec> spec;  // set when the law is parametric
  std::string label;
};

PerturbedLaw law_from_spec(const DistributionSpec& spec);

enum class EstimatorMode { ReverseIS, DirectResample };

std::string_view estimator_mode_name(EstimatorMode mode) noexcept;
/// Accepts "reverse_is" and "resample". Throws DomainError otherwise.
EstimatorMode estimator_mode_from_name(std::string_view name);

/// What direct resampling needs: the model is re-run on a fresh sample of
/// the nominal size for every perturbed law.
struct ResampleContext {
  Model model;
  std::uint64_t seed = 0;
  Parallelism parallelism{};
};

struct PliEstimate {
  double value;           // (q_perturbed - q) / q
  double quantile;        // perturbed quantile
  double baseline;        // nominal empirical quantile
  std::size_t exceed;     // outputs strictly beyond the perturbed quantile
  bool admissible;
};

/// Reverse importance sampling on the fixed sample. Throws DomainError when
/// the nominal quantile is zero.
PliEstimate pli_estimate(const IOSample& sample, std::size_t i, const PerturbedLaw& law, double alpha);
double pli(const IOSample& sample, std::size_t i, const DistributionSpec& perturbed, double alpha);

/// Fresh sample of sample.size() rows with input i drawn from the law and
/// the others from their nominal laws; baseline is the given sample.
PliEstimate pli_resample(const IOSample& sample, std::size_t i, const PerturbedLaw& law, double alpha,
                         const ResampleContext& context, std::uint64_t stream);

struct OfpliOptions {
  double alpha = 0.95;
  SphereOptions sphere{};
  EstimatorMode mode = EstimatorMode::ReverseIS;
  int bootstrap = 0;  // B; zero disables intervals
  std::uint64_t seed = 0;
  std::optional<ResampleContext> resample;  // required for DirectResample
};

struct SpherePli {
  int direction_index;
  double angle;
  ParamVector theta;
  bool valid;  // geodesic reached the sphere
  double value;
  std::size_t exceed;
  bool admissible;
};

struct OfpliLevel {
  std::size_t input_index = 0;
  double delta = 0.0;
  double s_plus = 0.0;
  double s_minus = 0.0;
  std::optional<DistributionSpec> argmax;
  std::optional<DistributionSpec> argmin;
  int argmax_index = -1;
  int argmin_index = -1;
  std::vector<SpherePli> points;
  std::size_t n_valid = 0;
  bool admissible = true;
  std::optional<BootstrapResult> ci_plus;
  std::optional<BootstrapResult> ci_minus;
};

/// Maximum and minimum PLI over the Fisher sphere of radius delta around
/// input i. S+ and S- range over points that are both valid and admissible;
/// a single inadmissible point marks the whole level inadmissible. When no
/// point qualifies S+ and S- are NaN.
OfpliLevel ofpli_at_delta(const IOSample& sample, std::size_t i, double delta, const OfpliOptions& options);
/// Same with a precomputed sphere (any chart).
OfpliLevel ofpli_at_delta(const IOSample& sample, std::size_t i, const FisherSphere& sphere,
                          const OfpliOptions& options);

struct PliCurve {
  std::size_t input_index = 0;
  std::vector<OfpliLevel> levels;
  /// Largest admissible grid value; absent when the first level already fails.
  std::optional<double> delta_max;
};

/// Throws DomainError unless the grid is strictly increasing and positive.
void validate_delta_grid(const std::vector<double>& grid);

/// One level per grid value; once a level is inadmissible every later level
/// is flagged inadmissible too.
PliCurve ofpli_curve(const IOSample& sample, std::size_t i, const std::vector<double>& delta_grid,
                     const OfpliOptions& options);
/// Applies the monotone cutoff and fills delta_max.
void apply_admissibility_cutoff(PliCurve& curve);

/// f_delta(x) = exp((-delta^2 + 2 delta Phi^{-1}(F(x))) / 2) f(x), sampled as
/// F^{-1}(Phi(Phi^{-1}(u) + delta)).
PerturbedLaw epli_perturbed_density(const DistributionSpec& spec, double delta);

enum class EpliMode { MeanShift, VarianceScale };

std::string_view epli_mode_name(EpliMode mode) noexcept;
EpliMode epli_mode_from_name(std::string_view name);

/// VarianceScale keeps the mean and multiplies the variance by v; only
/// Gaussian inputs (Normal, TruncNormal) qualify.
PerturbedLaw epli_variance_law(const DistributionSpec& spec, double v);

struct EpliPoint {
  double parameter;
  PliEstimate estimate;
};

std::vector<EpliPoint> epli_curve(const IOSample& sample, std::size_t i, const std::vector<double>& grid,
                                  double alpha, EpliMode mode, EstimatorMode estimator = EstimatorMode::ReverseIS,
                                  const std::optional<ResampleContext>& resample = std::nullopt);

}  // namespace fisherpli

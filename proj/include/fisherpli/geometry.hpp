#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fisherpli/distributions.hpp"
#include "fisherpli/parallel.hpp"

namespace fisherpli {

/// A coordinate system on a family's parameter manifold: the Fisher metric
/// in these coordinates and the map back to distributions.
class ParameterChart {
 public:
  virtual ~ParameterChart() = default;
  virtual int dimension() const = 0;
  virtual bool in_domain(const ParamVector& q) const = 0;
  virtual ParamMatrix metric(const ParamVector& q) const = 0;
  virtual std::vector<ParamMatrix> metric_gradient(const ParamVector& q) const = 0;
  virtual DistributionSpec to_spec(const ParamVector& q) const = 0;
};

/// The family's own parameters (theta), support held fixed. Throws
/// UnsupportedFamilyError for Uniform.
std::shared_ptr<const ParameterChart> natural_chart(const DistributionSpec& like);

/// Untruncated Gaussian in (mu, variance) coordinates.
std::shared_ptr<const ParameterChart> normal_variance_chart();

enum class Integrator { Euler, AdamsMoulton };
enum class PathStatus { Complete, TruncatedAtBoundary, Failed };

std::string_view integrator_name(Integrator method) noexcept;
Integrator integrator_from_name(std::string_view name);
std::string_view status_name(PathStatus status) noexcept;

inline constexpr int kDefaultSteps = 1000;

struct GeodesicStep {
  double t;
  ParamVector q;
  ParamVector p;
  double hamiltonian;
  double drift;  // (H(t) - H(0)) / H(0), zero when H(0) = 0
};

struct GeodesicPath {
  std::vector<GeodesicStep> steps;
  PathStatus status = PathStatus::Complete;
  double t_exit = 0.0;  // meaningful for TruncatedAtBoundary and Failed
  std::string message;

  const GeodesicStep& last() const { return steps.back(); }
  double max_abs_drift() const;
  /// Composite trapezoid of sqrt(q'^T I q') = sqrt(2 H) over the steps.
  double measured_length() const;
};

/// Fixed-step integration of Hamilton's equations on [0, 1]:
///   q' = I^{-1}(q) p,   p'_j = 1/2 q'^T (dI/dq_j) q'.
/// Adams-Moulton is an AB2 predictor with trapezoidal corrector (PECE),
/// started by one classical RK4 step. Stops with TruncatedAtBoundary when q
/// leaves the parameter domain (or the gradient stencil no longer fits), and
/// with Failed when the metric cannot be evaluated or is not positive definite.
GeodesicPath integrate_geodesic(const ParameterChart& chart, const ParamVector& q0, const ParamVector& p0,
                                Integrator method, int n_steps = kDefaultSteps);

GeodesicPath integrate_geodesic(const DistributionSpec& center, const ParamVector& p0, Integrator method,
                                int n_steps = kDefaultSteps);

struct Direction {
  double angle;     // 0 or pi when r = 1
  ParamVector unit;
};

/// Equally spaced unit vectors: K angles 2 pi k / K for r = 2, {+1, -1} for r = 1.
std::vector<Direction> sphere_directions(int r, int K);

/// p_k = delta * L u_k with I(q0) = L L^T, so that p^T I^{-1} p = delta^2.
std::vector<ParamVector> initial_momenta(const ParameterChart& chart, const ParamVector& q0, double delta,
                                         const std::vector<Direction>& directions);
std::vector<ParamVector> initial_momenta(const DistributionSpec& center, double delta, int K);

/// Closed-form Fisher distance between N(mu0, sigma0^2) and N(mu1, sigma1^2):
/// sqrt(2) times the Poincare half-plane distance in (mu / sqrt(2), sigma).
double gaussian_fisher_distance(double mu0, double sigma0, double mu1, double sigma1);

struct SpherePoint {
  int direction_index;
  double angle;
  ParamVector theta;  // endpoint (last valid state when invalid)
  PathStatus status;
  double measured_length;
  double max_abs_drift;
  std::string message;

  bool valid() const noexcept { return status == PathStatus::Complete; }
};

struct FisherSphere {
  std::shared_ptr<const ParameterChart> chart;
  ParamVector center_theta;
  double radius;
  std::vector<SpherePoint> points;

  std::size_t valid_count() const;
  DistributionSpec center() const { return chart->to_spec(center_theta); }
  DistributionSpec point_spec(std::size_t k) const { return chart->to_spec(points[k].theta); }
};

struct SphereOptions {
  int K = 100;
  Integrator method = Integrator::AdamsMoulton;
  int n_steps = kDefaultSteps;
  Parallelism parallelism{};
};

/// Endpoints of the geodesics shot from the center in every sphere
/// direction. Paths that leave the domain, fail, or whose length misses the
/// radius by more than 10 / n_steps (relative) are kept but flagged invalid.
/// Throws SphereEmptyError when no path is valid.
FisherSphere fisher_sphere(std::shared_ptr<const ParameterChart> chart, const ParamVector& center_theta,
                           double delta, const SphereOptions& options = {});
FisherSphere fisher_sphere(const DistributionSpec& center, double delta, const SphereOptions& options = {});

}  // namespace fisherpli

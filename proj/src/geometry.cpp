#include "fisherpli/geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "fisherpli/error.hpp"

namespace fisherpli {

namespace {

class FamilyChart final : public ParameterChart {
 public:
  FamilyChart(FamilyTag family, Support support) : family_(family), support_(support) {}

  int dimension() const override { return parameter_count(family_); }
  bool in_domain(const ParamVector& q) const override { return theta_in_domain(family_, q, support_); }
  ParamMatrix metric(const ParamVector& q) const override { return fisher_information(to_spec(q)).matrix; }
  std::vector<ParamMatrix> metric_gradient(const ParamVector& q) const override {
    return fisher_information_gradient(to_spec(q));
  }
  DistributionSpec to_spec(const ParamVector& q) const override { return {family_, q, support_}; }

 private:
  FamilyTag family_;
  Support support_;
};

class NormalVarianceChart final : public ParameterChart {
 public:
  int dimension() const override { return 2; }
  bool in_domain(const ParamVector& q) const override {
    return q.size() == 2 && std::isfinite(q[0]) && std::isfinite(q[1]) && q[1] > 0.0;
  }
  ParamMatrix metric(const ParamVector& q) const override {
    ParamMatrix m = ParamMatrix::Zero(2, 2);
    m(0, 0) = 1.0 / q[1];
    m(1, 1) = 1.0 / (2.0 * q[1] * q[1]);
    return m;
  }
  std::vector<ParamMatrix> metric_gradient(const ParamVector& q) const override {
    ParamMatrix dv = ParamMatrix::Zero(2, 2);
    dv(0, 0) = -1.0 / (q[1] * q[1]);
    dv(1, 1) = -1.0 / (q[1] * q[1] * q[1]);
    return {ParamMatrix::Zero(2, 2), dv};
  }
  DistributionSpec to_spec(const ParamVector& q) const override {
    return DistributionSpec::normal(q[0], std::sqrt(q[1]));
  }
};

struct PhasePoint {
  ParamVector q, p;
};

struct Derivative {
  ParamVector dq, dp;
  double hamiltonian;
};

// Signals that the state cannot be continued; `boundary` distinguishes
// leaving the parameter domain from a numerical failure.
struct Stop {
  bool boundary;
  std::string message;
};

Derivative hamilton_rhs(const ParameterChart& chart, const PhasePoint& s) {
  if (!chart.in_domain(s.q)) throw Stop{true, "left the parameter domain"};
  ParamMatrix metric;
  std::vector<ParamMatrix> grads;
  try {
    metric = chart.metric(s.q);
    grads = chart.metric_gradient(s.q);
  } catch (const DomainError& e) {
    throw Stop{true, e.what()};
  } catch (const Error& e) {
    throw Stop{false, e.what()};
  }
  Eigen::LLT<ParamMatrix> llt(metric);
  if (llt.info() != Eigen::Success || !metric.allFinite())
    throw Stop{false, "Fisher information is not positive definite"};
  Derivative d;
  d.dq = llt.solve(s.p);
  if (!d.dq.allFinite()) throw Stop{false, "Fisher information is singular"};
  d.hamiltonian = 0.5 * s.p.dot(d.dq);
  d.dp.resize(s.p.size());
  for (Eigen::Index j = 0; j < s.p.size(); ++j)
    d.dp[j] = 0.5 * d.dq.dot(grads[static_cast<std::size_t>(j)] * d.dq);
  return d;
}

PhasePoint advance(const PhasePoint& s, double h, const Derivative& d) {
  return {s.q + h * d.dq, s.p + h * d.dp};
}

}  // namespace

std::shared_ptr<const ParameterChart> natural_chart(const DistributionSpec& like) {
  if (!has_fisher_structure(like.family()))
    throw UnsupportedFamilyError(std::string(family_name(like.family())) +
                                 " has no Fisher structure; geometry operations are not available");
  return std::make_shared<FamilyChart>(like.family(), like.support());
}

std::shared_ptr<const ParameterChart> normal_variance_chart() {
  return std::make_shared<NormalVarianceChart>();
}

std::string_view integrator_name(Integrator method) noexcept {
  return method == Integrator::Euler ? "euler" : "adams_moulton";
}

Integrator integrator_from_name(std::string_view name) {
  if (name == "euler") return Integrator::Euler;
  if (name == "adams_moulton" || name == "adams-moulton") return Integrator::AdamsMoulton;
  throw DomainError("unknown integrator '" + std::string(name) + "'");
}

std::string_view status_name(PathStatus status) noexcept {
  switch (status) {
    case PathStatus::Complete: return "Complete";
    case PathStatus::TruncatedAtBoundary: return "TruncatedAtBoundary";
    case PathStatus::Failed: return "Failed";
  }
  return "Unknown";
}

double GeodesicPath::max_abs_drift() const {
  double m = 0.0;
  for (const auto& s : steps) m = std::max(m, std::abs(s.drift));
  return m;
}

double GeodesicPath::measured_length() const {
  double len = 0.0;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const double a = std::sqrt(std::max(0.0, 2.0 * steps[k - 1].hamiltonian));
    const double b = std::sqrt(std::max(0.0, 2.0 * steps[k].hamiltonian));
    len += 0.5 * (a + b) * (steps[k].t - steps[k - 1].t);
  }
  return len;
}

GeodesicPath integrate_geodesic(const ParameterChart& chart, const ParamVector& q0, const ParamVector& p0,
                                Integrator method, int n_steps) {
  if (n_steps < 10) throw DomainError("integrate_geodesic: n_steps must be >= 10");
  if (q0.size() != chart.dimension() || p0.size() != chart.dimension())
    throw DomainError("integrate_geodesic: dimension mismatch");
  if (!p0.allFinite()) throw DomainError("integrate_geodesic: initial momentum must be finite");

  GeodesicPath path;
  path.steps.reserve(static_cast<std::size_t>(n_steps) + 1);
  const double h = 1.0 / n_steps;
  double h0 = 0.0;

  auto record = [&](double t, const PhasePoint& s, const Derivative& d) {
    const double drift = h0 > 0.0 ? (d.hamiltonian - h0) / h0 : 0.0;
    path.steps.push_back({t, s.q, s.p, d.hamiltonian, drift});
  };

  PhasePoint state{q0, p0};
  Derivative f_curr;
  try {
    f_curr = hamilton_rhs(chart, state);
  } catch (const Stop& stop) {
    if (stop.boundary) throw DomainError("integrate_geodesic: center outside the parameter domain");
    throw NumericalError(std::string("integrate_geodesic: ") + stop.message);
  }
  h0 = f_curr.hamiltonian;
  record(0.0, state, f_curr);

  Derivative f_prev;
  for (int k = 0; k < n_steps; ++k) {
    const double t_next = (k + 1 == n_steps) ? 1.0 : (k + 1) * h;
    try {
      PhasePoint next;
      if (method == Integrator::Euler) {
        next = advance(state, h, f_curr);
      } else if (k == 0) {
        const Derivative k2 = hamilton_rhs(chart, advance(state, 0.5 * h, f_curr));
        const Derivative k3 = hamilton_rhs(chart, advance(state, 0.5 * h, k2));
        const Derivative k4 = hamilton_rhs(chart, advance(state, h, k3));
        next.q = state.q + (h / 6.0) * (f_curr.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
        next.p = state.p + (h / 6.0) * (f_curr.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
      } else {
        PhasePoint predicted{state.q + h * (1.5 * f_curr.dq - 0.5 * f_prev.dq),
                             state.p + h * (1.5 * f_curr.dp - 0.5 * f_prev.dp)};
        const Derivative f_pred = hamilton_rhs(chart, predicted);
        next.q = state.q + 0.5 * h * (f_curr.dq + f_pred.dq);
        next.p = state.p + 0.5 * h * (f_curr.dp + f_pred.dp);
      }
      const Derivative f_next = hamilton_rhs(chart, next);
      f_prev = f_curr;
      f_curr = f_next;
      state = next;
      record(t_next, state, f_curr);
    } catch (const Stop& stop) {
      path.status = stop.boundary ? PathStatus::TruncatedAtBoundary : PathStatus::Failed;
      path.t_exit = t_next;
      path.message = stop.message;
      return path;
    }
  }
  return path;
}

GeodesicPath integrate_geodesic(const DistributionSpec& center, const ParamVector& p0, Integrator method,
                                int n_steps) {
  const auto chart = natural_chart(center);
  return integrate_geodesic(*chart, center.theta(), p0, method, n_steps);
}

std::vector<Direction> sphere_directions(int r, int K) {
  std::vector<Direction> dirs;
  if (r == 1) {
    ParamVector plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    dirs.push_back({0.0, plus});
    dirs.push_back({std::numbers::pi, minus});
    return dirs;
  }
  if (r != 2) throw DomainError("sphere_directions: only 1- and 2-parameter families are supported");
  if (K < 1) throw DomainError("sphere_directions: K must be >= 1");
  dirs.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / K;
    ParamVector u(2);
    u << std::cos(angle), std::sin(angle);
    dirs.push_back({angle, u});
  }
  return dirs;
}

std::vector<ParamVector> initial_momenta(const ParameterChart& chart, const ParamVector& q0, double delta,
                                         const std::vector<Direction>& directions) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("initial_momenta: delta must be >= 0");
  const ParamMatrix metric = chart.metric(q0);
  Eigen::LLT<ParamMatrix> llt(metric);
  if (llt.info() != Eigen::Success)
    throw NumericalError("initial_momenta: Fisher information is not positive definite");
  const ParamMatrix lower = llt.matrixL();
  std::vector<ParamVector> out;
  out.reserve(directions.size());
  for (const auto& d : directions) out.emplace_back(delta * (lower * d.unit));
  return out;
}

std::vector<ParamVector> initial_momenta(const DistributionSpec& center, double delta, int K) {
  const auto chart = natural_chart(center);
  return initial_momenta(*chart, center.theta(), delta, sphere_directions(center.dimension(), K));
}

double gaussian_fisher_distance(double mu0, double sigma0, double mu1, double sigma1) {
  if (!(sigma0 > 0.0) || !(sigma1 > 0.0)) throw DomainError("gaussian_fisher_distance: sigma must be > 0");
  // acosh(1 + x) = 2 asinh(sqrt(x / 2)), stable for nearby points.
  const double du = (mu1 - mu0) / std::numbers::sqrt2;
  const double ds = sigma1 - sigma0;
  const double chord = std::sqrt(du * du + ds * ds) / (2.0 * std::sqrt(sigma0 * sigma1));
  return 2.0 * std::numbers::sqrt2 * std::asinh(chord);
}

std::size_t FisherSphere::valid_count() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.valid() ? 1 : 0;
  return n;
}

FisherSphere fisher_sphere(std::shared_ptr<const ParameterChart> chart, const ParamVector& center_theta,
                           double delta, const SphereOptions& options) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("fisher_sphere: delta must be > 0");
  const int r = chart->dimension();
  if (r == 2 && options.K < 2) throw DomainError("fisher_sphere: K must be >= 2");
  const auto directions = sphere_directions(r, options.K);
  const auto momenta = initial_momenta(*chart, center_theta, delta, directions);

  FisherSphere sphere{chart, center_theta, delta, {}};
  sphere.points.resize(directions.size());
  const double length_tol = 10.0 / options.n_steps;
  parallel_for(directions.size(), options.parallelism, [&](std::size_t k) {
    const GeodesicPath path = integrate_geodesic(*chart, center_theta, momenta[k], options.method, options.n_steps);
    SpherePoint pt{static_cast<int>(k), directions[k].angle, path.last().q, path.status,
                   path.measured_length(), path.max_abs_drift(), path.message};
    if (pt.valid() && std::abs(pt.measured_length - delta) > length_tol * delta) {
      pt.status = PathStatus::Failed;
      pt.message = "path length misses the radius";
    }
    sphere.points[k] = std::move(pt);
  });
  if (sphere.valid_count() == 0)
    throw SphereEmptyError("fisher_sphere: no valid geodesic at delta = " + std::to_string(delta) + " around " +
                           describe(chart->to_spec(center_theta)));
  return sphere;
}

FisherSphere fisher_sphere(const DistributionSpec& center, double delta, const SphereOptions& options) {
  return fisher_sphere(natural_chart(center), center.theta(), delta, options);
}

}  // namespace fisherpli

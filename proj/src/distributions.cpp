#include "fisherpli/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "fisherpli/error.hpp"
#include "fisherpli/quadrature.hpp"
#include "fisherpli/random.hpp"

namespace fisherpli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative tolerance for the Fisher information quadrature. Tighter than the
// 1e-8 contract because the gradient is a central difference of it.
constexpr double kFisherQuadTol = 1e-12;

}  // namespace

std::string_view family_name(FamilyTag family) noexcept {
  switch (family) {
    case FamilyTag::TruncNormal: return "trunc_normal";
    case FamilyTag::TruncLogNormal: return "trunc_lognormal";
    case FamilyTag::TruncGumbel: return "trunc_gumbel";
    case FamilyTag::Triangular: return "triangular";
    case FamilyTag::Normal: return "normal";
    case FamilyTag::Uniform: return "uniform";
  }
  return "unknown";
}

FamilyTag family_from_name(std::string_view name) {
  for (FamilyTag f : {FamilyTag::TruncNormal, FamilyTag::TruncLogNormal, FamilyTag::TruncGumbel,
                      FamilyTag::Triangular, FamilyTag::Normal, FamilyTag::Uniform}) {
    if (family_name(f) == name) return f;
  }
  throw DomainError("unknown distribution family '" + std::string(name) + "'");
}

int parameter_count(FamilyTag family) noexcept {
  switch (family) {
    case FamilyTag::Triangular: return 1;
    case FamilyTag::Uniform: return 0;
    default: return 2;
  }
}

bool has_fisher_structure(FamilyTag family) noexcept { return family != FamilyTag::Uniform; }

bool Support::bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }

bool theta_in_domain(FamilyTag family, const ParamVector& theta, const Support& support) noexcept {
  if (theta.size() != parameter_count(family)) return false;
  for (Eigen::Index k = 0; k < theta.size(); ++k)
    if (!std::isfinite(theta[k])) return false;
  switch (family) {
    case FamilyTag::Triangular: return theta[0] > support.lo && theta[0] < support.hi;
    case FamilyTag::Uniform: return true;
    case FamilyTag::TruncGumbel: return theta[0] > 0.0 && theta[1] > 0.0;
    default: return theta[1] > 0.0;
  }
}

DistributionSpec::DistributionSpec(FamilyTag family, ParamVector theta, Support support)
    : family_(family), theta_(std::move(theta)), support_(support) {
  const std::string name(family_name(family));
  if (std::isnan(support.lo) || std::isnan(support.hi) || !(support.lo < support.hi))
    throw DomainError(name + ": support must satisfy lo < hi");
  if (theta_.size() != parameter_count(family))
    throw DomainError(name + ": expected " + std::to_string(parameter_count(family)) +
                      " parameters, got " + std::to_string(theta_.size()));
  switch (family) {
    case FamilyTag::Normal:
      if (std::isfinite(support.lo) || std::isfinite(support.hi))
        throw DomainError("normal: support must be unbounded (use trunc_normal for truncation)");
      break;
    case FamilyTag::TruncLogNormal:
      if (support.lo < 0.0) throw DomainError("trunc_lognormal: support must lie in [0, inf)");
      break;
    case FamilyTag::Triangular:
    case FamilyTag::Uniform:
      if (!support.bounded()) throw DomainError(name + ": support must be bounded");
      break;
    default: break;
  }
  if (!theta_in_domain(family, theta_, support_)) {
    std::ostringstream os;
    os << name << ": parameters outside the open domain (";
    for (Eigen::Index k = 0; k < theta_.size(); ++k) os << (k ? ", " : "") << theta_[k];
    os << ")";
    throw DomainError(os.str());
  }
}

static ParamVector vec2(double a, double b) {
  ParamVector v(2);
  v << a, b;
  return v;
}

static ParamVector vec1(double a) {
  ParamVector v(1);
  v << a;
  return v;
}

DistributionSpec DistributionSpec::normal(double mu, double sigma) {
  return {FamilyTag::Normal, vec2(mu, sigma), Support{}};
}
DistributionSpec DistributionSpec::trunc_normal(double mu, double sigma, double lo, double hi) {
  return {FamilyTag::TruncNormal, vec2(mu, sigma), Support{lo, hi}};
}
DistributionSpec DistributionSpec::trunc_lognormal(double mu, double sigma, double lo, double hi) {
  return {FamilyTag::TruncLogNormal, vec2(mu, sigma), Support{lo, hi}};
}
DistributionSpec DistributionSpec::trunc_gumbel(double location, double scale, double lo, double hi) {
  return {FamilyTag::TruncGumbel, vec2(location, scale), Support{lo, hi}};
}
DistributionSpec DistributionSpec::triangular(double lo, double mode, double hi) {
  return {FamilyTag::Triangular, vec1(mode), Support{lo, hi}};
}
DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  return {FamilyTag::Uniform, ParamVector(0), Support{lo, hi}};
}

DistributionSpec DistributionSpec::with_theta(const ParamVector& theta) const {
  return {family_, theta, support_};
}

bool DistributionSpec::operator==(const DistributionSpec& other) const {
  return family_ == other.family_ && support_ == other.support_ && theta_.size() == other.theta_.size() &&
         theta_ == other.theta_;
}

std::string describe(const DistributionSpec& spec) {
  std::ostringstream os;
  os.precision(10);
  os << family_name(spec.family()) << "(";
  for (Eigen::Index k = 0; k < spec.theta().size(); ++k) os << (k ? ", " : "") << spec.theta()[k];
  os << ") on [" << spec.support().lo << ", " << spec.support().hi << "]";
  return os.str();
}

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}
double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_sf(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

// ---------------------------------------------------------------------------
// Truncated location/scale machinery. A family is a standardized kernel g on
// z = (t(x) - mu) / sigma, with t = identity or log, restricted to
// [za, zb] and renormalized by Z = G(zb) - G(za).

enum class Kernel { Normal, Gumbel };

double kernel_pdf(Kernel k, double z) noexcept {
  if (!std::isfinite(z)) return 0.0;
  if (k == Kernel::Normal) return normal_pdf(z);
  return std::exp(-z - std::exp(-z));
}

double kernel_log_pdf(Kernel k, double z) noexcept {
  if (k == Kernel::Normal) return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
  return -z - std::exp(-z);
}

double kernel_cdf(Kernel k, double z) noexcept {
  if (k == Kernel::Normal) return normal_cdf(z);
  if (z == -kInf) return 0.0;
  return std::exp(-std::exp(-z));
}

double kernel_sf(Kernel k, double z) noexcept {
  if (k == Kernel::Normal) return normal_sf(z);
  if (z == -kInf) return 1.0;
  return -std::expm1(-std::exp(-z));
}

double kernel_cdf_inv(Kernel k, double p) {
  if (k == Kernel::Normal) return normal_quantile(p);
  return -std::log(-std::log(p));
}

double kernel_sf_inv(Kernel k, double s) {
  if (k == Kernel::Normal) return -normal_quantile(s);
  return -std::log(-std::log1p(-s));
}

// d/dz log g(z)
double kernel_psi(Kernel k, double z) noexcept {
  if (k == Kernel::Normal) return -z;
  return std::expm1(-z);
}

// z * g(z), zero at the infinities.
double z_pdf(Kernel k, double z) noexcept { return std::isfinite(z) ? z * kernel_pdf(k, z) : 0.0; }

struct LocScale {
  Kernel kernel;
  bool log_space;
  double mu, sigma;
  double za, zb;
  double mass;  // Z
  bool truncated;

  double transform(double x) const { return log_space ? std::log(x) : x; }
  double untransform(double t) const { return log_space ? std::exp(t) : t; }
  double standardize(double x) const { return (transform(x) - mu) / sigma; }

  // Lower-tail and upper-tail differences, picking the accurate side.
  double mass_between(double z0, double z1) const {
    if (z0 > 0.0) return kernel_sf(kernel, z0) - kernel_sf(kernel, z1);
    return kernel_cdf(kernel, z1) - kernel_cdf(kernel, z0);
  }

  // c = grad_theta log Z
  std::array<double, 2> log_mass_gradient() const {
    if (!truncated) return {0.0, 0.0};
    const double dmu = -(kernel_pdf(kernel, zb) - kernel_pdf(kernel, za)) / sigma;
    const double dsigma = -(z_pdf(kernel, zb) - z_pdf(kernel, za)) / sigma;
    return {dmu / mass, dsigma / mass};
  }

  // sigma * (parent score) as a function of z.
  std::array<double, 2> scaled_parent_score(double z) const {
    const double psi = kernel_psi(kernel, z);
    return {-psi, -psi * z - 1.0};
  }

  // Standardized window where the truncated kernel has non-negligible mass.
  std::pair<double, double> z_window() const {
    double lo = za, hi = zb;
    if (kernel == Kernel::Normal) {
      lo = std::max(lo, std::min(zb, 0.0) - 12.0);
      hi = std::min(hi, std::max(za, 0.0) + 12.0);
    } else {
      lo = std::max(lo, std::min(zb, 0.0) - 5.0);
      hi = std::min(hi, std::max(za, 0.0) + 45.0);
    }
    return {lo, hi};
  }
};

bool is_loc_scale(FamilyTag f) {
  return f == FamilyTag::Normal || f == FamilyTag::TruncNormal || f == FamilyTag::TruncLogNormal ||
         f == FamilyTag::TruncGumbel;
}

LocScale loc_scale(const DistributionSpec& spec) {
  LocScale ls{};
  const FamilyTag f = spec.family();
  ls.kernel = f == FamilyTag::TruncGumbel ? Kernel::Gumbel : Kernel::Normal;
  ls.log_space = f == FamilyTag::TruncLogNormal;
  ls.mu = spec.theta()[0];
  ls.sigma = spec.theta()[1];
  const Support& s = spec.support();
  ls.za = s.lo == -kInf ? -kInf : (ls.log_space && s.lo == 0.0 ? -kInf : ls.standardize(s.lo));
  ls.zb = s.hi == kInf ? kInf : ls.standardize(s.hi);
  ls.truncated = std::isfinite(ls.za) || std::isfinite(ls.zb);
  ls.mass = ls.truncated ? ls.mass_between(ls.za, ls.zb) : 1.0;
  if (!(ls.mass > 1e-300))
    throw NumericalError(describe(spec) + ": truncation normalizer underflows", ls.mass);
  return ls;
}

double triangular_cdf(double a, double m, double b, double x) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  if (x < m) return (x - a) * (x - a) / ((b - a) * (m - a));
  return 1.0 - (b - x) * (b - x) / ((b - a) * (b - m));
}

}  // namespace

double pdf(const DistributionSpec& spec, double x) {
  const Support& s = spec.support();
  if (!s.contains(x) || std::isnan(x)) return 0.0;
  switch (spec.family()) {
    case FamilyTag::Uniform: return 1.0 / (s.hi - s.lo);
    case FamilyTag::Triangular: {
      const double a = s.lo, b = s.hi, m = spec.theta()[0];
      if (x < m) return 2.0 * (x - a) / ((b - a) * (m - a));
      return 2.0 * (b - x) / ((b - a) * (b - m));
    }
    case FamilyTag::Normal: {
      const double mu = spec.theta()[0], sigma = spec.theta()[1];
      return normal_pdf((x - mu) / sigma) / sigma;
    }
    default: {
      const LocScale ls = loc_scale(spec);
      if (ls.log_space && x <= 0.0) return 0.0;
      const double z = ls.standardize(x);
      const double jac = ls.log_space ? x : 1.0;
      return kernel_pdf(ls.kernel, z) / (ls.sigma * jac * ls.mass);
    }
  }
}

double log_pdf(const DistributionSpec& spec, double x) {
  const Support& s = spec.support();
  if (!s.contains(x)) return -kInf;
  if (is_loc_scale(spec.family())) {
    const LocScale ls = loc_scale(spec);
    if (ls.log_space && x <= 0.0) return -kInf;
    const double z = ls.standardize(x);
    const double log_jac = ls.log_space ? std::log(x) : 0.0;
    return kernel_log_pdf(ls.kernel, z) - std::log(ls.sigma) - log_jac - std::log(ls.mass);
  }
  return std::log(pdf(spec, x));
}

double cdf(const DistributionSpec& spec, double x) {
  const Support& s = spec.support();
  if (x <= s.lo) return 0.0;
  if (x >= s.hi) return 1.0;
  switch (spec.family()) {
    case FamilyTag::Uniform: return (x - s.lo) / (s.hi - s.lo);
    case FamilyTag::Triangular: return triangular_cdf(s.lo, spec.theta()[0], s.hi, x);
    case FamilyTag::Normal: return normal_cdf((x - spec.theta()[0]) / spec.theta()[1]);
    default: {
      const LocScale ls = loc_scale(spec);
      const double z = ls.standardize(x);
      double value;
      if (ls.za > 0.0)
        value = (kernel_sf(ls.kernel, ls.za) - kernel_sf(ls.kernel, z)) / ls.mass;
      else
        value = (kernel_cdf(ls.kernel, z) - kernel_cdf(ls.kernel, ls.za)) / ls.mass;
      return std::clamp(value, 0.0, 1.0);
    }
  }
}

double quantile(const DistributionSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie strictly inside (0, 1)");
  const Support& s = spec.support();
  switch (spec.family()) {
    case FamilyTag::Uniform: return s.lo + u * (s.hi - s.lo);
    case FamilyTag::Triangular: {
      const double a = s.lo, b = s.hi, m = spec.theta()[0];
      if (u < (m - a) / (b - a)) return a + std::sqrt(u * (b - a) * (m - a));
      return b - std::sqrt((1.0 - u) * (b - a) * (b - m));
    }
    case FamilyTag::Normal: return spec.theta()[0] + spec.theta()[1] * normal_quantile(u);
    default: {
      const LocScale ls = loc_scale(spec);
      double z;
      if (ls.za > 0.0)
        z = kernel_sf_inv(ls.kernel, kernel_sf(ls.kernel, ls.za) - u * ls.mass);
      else
        z = kernel_cdf_inv(ls.kernel, kernel_cdf(ls.kernel, ls.za) + u * ls.mass);
      return std::clamp(ls.untransform(ls.mu + ls.sigma * z), s.lo, s.hi);
    }
  }
}

std::vector<double> sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = quantile(spec, rng.uniform());
  return out;
}

ParamVector score(const DistributionSpec& spec, double x) {
  const Support& s = spec.support();
  if (!s.contains(x) || std::isnan(x)) throw DomainError("score: x outside the support");
  switch (spec.family()) {
    case FamilyTag::Uniform: throw UnsupportedFamilyError("uniform has no Fisher structure");
    case FamilyTag::Triangular: {
      const double a = s.lo, b = s.hi, m = spec.theta()[0];
      return vec1(x < m ? -1.0 / (m - a) : 1.0 / (b - m));
    }
    default: {
      const LocScale ls = loc_scale(spec);
      if (ls.log_space && x <= 0.0) throw DomainError("score: x outside the support");
      const double z = ls.standardize(x);
      const auto a = ls.scaled_parent_score(z);
      const auto c = ls.log_mass_gradient();
      return vec2(a[0] / ls.sigma - c[0], a[1] / ls.sigma - c[1]);
    }
  }
}

FisherMatrix fisher_information(const DistributionSpec& spec) {
  FisherMatrix out;
  out.theta_at = spec.theta();
  switch (spec.family()) {
    case FamilyTag::Uniform: throw UnsupportedFamilyError("uniform has no Fisher structure");
    case FamilyTag::Normal: {
      const double s2 = spec.theta()[1] * spec.theta()[1];
      out.matrix = ParamMatrix::Zero(2, 2);
      out.matrix(0, 0) = 1.0 / s2;
      out.matrix(1, 1) = 2.0 / s2;
      return out;
    }
    case FamilyTag::Triangular: {
      const double a = spec.support().lo, b = spec.support().hi, m = spec.theta()[0];
      out.matrix = ParamMatrix::Constant(1, 1, 1.0 / ((m - a) * (b - m)));
      return out;
    }
    default: break;
  }

  // I = Cov(score) = E[(a - m)(a - m)^T] / sigma^2 in the standardized
  // variable, with a the scaled parent score and m = sigma * grad log Z its
  // exact mean.
  const LocScale ls = loc_scale(spec);
  const auto c = ls.log_mass_gradient();
  const double m0 = ls.sigma * c[0], m1 = ls.sigma * c[1];
  auto integrand = [&](double z) {
    const auto a = ls.scaled_parent_score(z);
    const double w = kernel_pdf(ls.kernel, z) / ls.mass;
    const double d0 = a[0] - m0, d1 = a[1] - m1;
    return std::array<double, 3>{w * d0 * d0, w * d0 * d1, w * d1 * d1};
  };
  const auto [z0, z1] = ls.z_window();
  QuadratureOptions opt;
  opt.rel_tol = kFisherQuadTol;
  const auto res = integrate_adaptive<3>(integrand, z0, z1, opt);
  const double s2 = ls.sigma * ls.sigma;
  out.matrix = ParamMatrix(2, 2);
  out.matrix(0, 0) = res.value[0] / s2;
  out.matrix(0, 1) = out.matrix(1, 0) = res.value[1] / s2;
  out.matrix(1, 1) = res.value[2] / s2;
  return out;
}

double fisher_gradient_step(double theta_j) noexcept { return 1e-4 * std::max(1.0, std::abs(theta_j)); }

std::vector<ParamMatrix> fisher_information_gradient(const DistributionSpec& spec) {
  const int r = spec.dimension();
  if (!has_fisher_structure(spec.family())) throw UnsupportedFamilyError("uniform has no Fisher structure");
  std::vector<ParamMatrix> grads;
  grads.reserve(static_cast<std::size_t>(r));
  if (spec.family() == FamilyTag::Normal) {
    const double s3 = std::pow(spec.theta()[1], 3);
    grads.push_back(ParamMatrix::Zero(2, 2));
    ParamMatrix ds = ParamMatrix::Zero(2, 2);
    ds(0, 0) = -2.0 / s3;
    ds(1, 1) = -4.0 / s3;
    grads.push_back(ds);
    return grads;
  }
  if (spec.family() == FamilyTag::Triangular) {
    const double m = spec.theta()[0], left = m - spec.support().lo, right = spec.support().hi - m;
    ParamMatrix dm(1, 1);
    dm(0, 0) = (left - right) / (left * left * right * right);
    grads.push_back(dm);
    return grads;
  }
  for (int j = 0; j < r; ++j) {
    const double h = fisher_gradient_step(spec.theta()[j]);
    ParamVector plus = spec.theta(), minus = spec.theta();
    plus[j] += h;
    minus[j] -= h;
    if (!theta_in_domain(spec.family(), plus, spec.support()) ||
        !theta_in_domain(spec.family(), minus, spec.support()))
      throw DomainError("fisher_information_gradient: stencil leaves the parameter domain at " +
                        describe(spec));
    const ParamMatrix ip = fisher_information(spec.with_theta(plus)).matrix;
    const ParamMatrix im = fisher_information(spec.with_theta(minus)).matrix;
    grads.push_back((ip - im) / (2.0 * h));
  }
  return grads;
}

Support integration_window(const DistributionSpec& spec) {
  const Support& s = spec.support();
  if (s.bounded()) return s;
  const LocScale ls = loc_scale(spec);
  const auto [z0, z1] = ls.z_window();
  Support w;
  w.lo = std::max(s.lo, ls.untransform(ls.mu + ls.sigma * z0));
  w.hi = std::min(s.hi, ls.untransform(ls.mu + ls.sigma * z1));
  return w;
}

double kl_divergence(const std::function<double(double)>& p, const std::function<double(double)>& q,
                     double lo, double hi, int points) {
  if (points < 3 || points % 2 == 0) throw DomainError("kl_divergence: points must be odd and >= 3");
  std::vector<double> values(static_cast<std::size_t>(points));
  const double h = (hi - lo) / (points - 1);
  for (int k = 0; k < points; ++k) {
    const double x = k == points - 1 ? hi : lo + h * k;
    const double px = p(x);
    double v = 0.0;
    if (px > 0.0 && std::isfinite(px)) {
      const double qx = q(x);
      v = qx > 0.0 ? px * std::log(px / qx) : kInf;
    }
    values[static_cast<std::size_t>(k)] = v;
  }
  return simpson(std::span<const double>(values), lo, hi);
}

double kl_divergence(const DistributionSpec& p, const DistributionSpec& q, int points) {
  const Support& sp = p.support();
  const Support& sq = q.support();
  if (sq.lo > sp.lo || sq.hi < sp.hi)
    throw DomainError("kl_divergence: support of q must contain the support of p");
  const Support w = integration_window(p);
  return kl_divergence([&](double x) { return pdf(p, x); }, [&](double x) { return pdf(q, x); }, w.lo,
                       w.hi, points);
}

}  // namespace fisherpli

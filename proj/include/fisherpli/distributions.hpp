#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace fisherpli {

/// Parameter vectors and matrices never exceed 2 entries per side, so they
/// live on the stack.
using ParamVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using ParamMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

enum class FamilyTag { TruncNormal, TruncLogNormal, TruncGumbel, Triangular, Normal, Uniform };

std::string_view family_name(FamilyTag family) noexcept;
/// Throws DomainError for an unknown name.
FamilyTag family_from_name(std::string_view name);
/// Length of theta: 2 for location/scale families, 1 for Triangular, 0 for Uniform.
int parameter_count(FamilyTag family) noexcept;
/// Uniform is the only family without a Fisher structure.
bool has_fisher_structure(FamilyTag family) noexcept;

struct Support {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  bool bounded() const noexcept;
  bool operator==(const Support&) const = default;
};

/// A point on a family's parameter manifold. The support is a structural
/// constant of the input and is never perturbed; only theta moves.
class DistributionSpec {
 public:
  /// Validates theta against the family's open parameter domain and the
  /// support against the family's requirements. Throws DomainError.
  DistributionSpec(FamilyTag family, ParamVector theta, Support support);

  static DistributionSpec normal(double mu, double sigma);
  static DistributionSpec trunc_normal(double mu, double sigma, double lo, double hi);
  static DistributionSpec trunc_lognormal(double mu, double sigma, double lo, double hi);
  static DistributionSpec trunc_gumbel(double location, double scale, double lo, double hi);
  static DistributionSpec triangular(double lo, double mode, double hi);
  static DistributionSpec uniform(double lo, double hi);

  FamilyTag family() const noexcept { return family_; }
  const ParamVector& theta() const noexcept { return theta_; }
  const Support& support() const noexcept { return support_; }
  int dimension() const noexcept { return static_cast<int>(theta_.size()); }

  /// Same family and support, new parameters (validated).
  DistributionSpec with_theta(const ParamVector& theta) const;

  bool operator==(const DistributionSpec& other) const;

 private:
  FamilyTag family_;
  ParamVector theta_;
  Support support_;
};

/// True when theta is in the open parameter domain of the family for the
/// given support (scale > 0, truncated Gumbel location > 0 too, triangular
/// mode strictly inside the support).
bool theta_in_domain(FamilyTag family, const ParamVector& theta, const Support& support) noexcept;

std::string describe(const DistributionSpec& spec);

// Standard normal helpers shared by several modules.
double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;
double normal_sf(double z) noexcept;
/// Inverse of normal_cdf; p in (0,1), returns +-inf at the endpoints.
double normal_quantile(double p);

double pdf(const DistributionSpec& spec, double x);
double log_pdf(const DistributionSpec& spec, double x);
double cdf(const DistributionSpec& spec, double x);
/// Throws DomainError unless 0 < u < 1.
double quantile(const DistributionSpec& spec, double u);
/// Inverse-transform sampling; deterministic given the seed.
std::vector<double> sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t n);

/// Gradient of log pdf with respect to theta, including the dependence of the
/// truncation normalizer on theta. Throws DomainError outside the support.
ParamVector score(const DistributionSpec& spec, double x);

struct FisherMatrix {
  ParamMatrix matrix;
  ParamVector theta_at;
};

/// Expected outer product of the score. Closed form for Normal and
/// Triangular, adaptive Gauss-Legendre quadrature in the standardized
/// variable for the truncated families. Throws UnsupportedFamilyError for
/// Uniform and NumericalError when the normalizer underflows or the
/// quadrature does not converge.
FisherMatrix fisher_information(const DistributionSpec& spec);

/// Derivatives dI/dtheta_j, j = 0..r-1. Normal and Triangular are analytic;
/// the truncated families use central differences with step
/// 1e-4 * max(1, |theta_j|). Throws DomainError when the stencil leaves the
/// parameter domain.
std::vector<ParamMatrix> fisher_information_gradient(const DistributionSpec& spec);

/// Central-difference step used by fisher_information_gradient.
double fisher_gradient_step(double theta_j) noexcept;

/// KL(p || q) = integral of p log(p/q) by composite Simpson's rule on
/// `points` nodes over p's support (quantile-clipped when unbounded).
/// Throws DomainError unless q's support contains p's.
double kl_divergence(const DistributionSpec& p, const DistributionSpec& q, int points = 2001);

/// Same rule for arbitrary densities on [lo, hi]. Nodes where p is zero
/// contribute nothing; nodes where p is not finite (an integrable endpoint
/// singularity) are skipped.
double kl_divergence(const std::function<double(double)>& p, const std::function<double(double)>& q,
                     double lo, double hi, int points = 2001);

/// Finite integration window for quadrature over the support: the support
/// itself when bounded, otherwise clipped where the density is negligible.
Support integration_window(const DistributionSpec& spec);

}  // namespace fisherpli

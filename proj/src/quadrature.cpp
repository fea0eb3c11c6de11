#include "fisherpli/quadrature.hpp"

#include <numbers>

namespace fisherpli {

namespace {

constexpr int kMaxOrder = 64;

GaussLegendreRule build_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  static const std::vector<GaussLegendreRule> rules = [] {
    std::vector<GaussLegendreRule> r;
    r.reserve(kMaxOrder + 1);
    r.emplace_back();
    for (int k = 1; k <= kMaxOrder; ++k) r.push_back(build_rule(k));
    return r;
  }();
  if (n < 1 || n > kMaxOrder) throw DomainError("Gauss-Legendre order must be in [1, 64]");
  return rules[static_cast<std::size_t>(n)];
}

double simpson(std::span<const double> values, double a, double b) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0) throw DomainError("Simpson's rule needs an odd number (>= 3) of nodes");
  const double h = (b - a) / static_cast<double>(n - 1);
  double acc = values.front() + values.back();
  for (std::size_t k = 1; k + 1 < n; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * values[k];
  return acc * h / 3.0;
}

}  // namespace fisherpli

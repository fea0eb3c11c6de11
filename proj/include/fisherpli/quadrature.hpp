#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "fisherpli/error.hpp"

namespace fisherpli {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point rule, nodes found by Newton iteration on P_n. Cached per n.
const GaussLegendreRule& gauss_legendre(int n);

template <std::size_t M>
struct QuadratureResult {
  std::array<double, M> value{};
  double error = 0.0;  // estimated absolute error (max-norm)
  int panels = 0;
};

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  int order = 20;
  int max_panels = 4000;
};

namespace detail {

template <std::size_t M, class F>
std::array<double, M> gl_panel(const F& f, double a, double b, const GaussLegendreRule& rule) {
  std::array<double, M> acc{};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const std::array<double, M> v = f(mid + half * rule.nodes[k]);
    for (std::size_t m = 0; m < M; ++m) acc[m] += rule.weights[k] * v[m];
  }
  for (auto& x : acc) x *= half;
  return acc;
}

template <std::size_t M>
double max_norm(const std::array<double, M>& v) {
  double n = 0.0;
  for (double x : v) n = std::max(n, std::abs(x));
  return n;
}

}  // namespace detail

/// Globally adaptive Gauss-Legendre quadrature of a vector-valued integrand.
/// Each panel's error is estimated by comparing the rule on the panel with the
/// rule on its two halves; the panel with the largest error is split until
/// the max-norm error meets max(abs_tol, rel_tol * |I|). `breaks` lists
/// interior points where the integrand is not smooth; they always become
/// panel boundaries.
template <std::size_t M, class F>
QuadratureResult<M> integrate_adaptive(const F& f, double a, double b,
                                        const QuadratureOptions& opt = {},
                                        std::span<const double> breaks = {}) {
  QuadratureResult<M> out;
  if (!(b > a)) return out;
  const GaussLegendreRule& rule = gauss_legendre(opt.order);

  struct Panel {
    double a, b;
    std::array<double, M> value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto make_panel = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const auto whole = detail::gl_panel<M>(f, lo, hi, rule);
    auto refined = detail::gl_panel<M>(f, lo, mid, rule);
    const auto right = detail::gl_panel<M>(f, mid, hi, rule);
    std::array<double, M> diff{};
    for (std::size_t m = 0; m < M; ++m) {
      refined[m] += right[m];
      diff[m] = refined[m] - whole[m];
    }
    return Panel{lo, hi, refined, detail::max_norm(diff)};
  };

  std::priority_queue<Panel> heap;
  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) heap.push(make_panel(cuts[k], cuts[k + 1]));

  auto totals = [&](std::array<double, M>& sum) {
    sum.fill(0.0);
    double err = 0.0;
    auto copy = heap;
    while (!copy.empty()) {
      const Panel& p = copy.top();
      for (std::size_t m = 0; m < M; ++m) sum[m] += p.value[m];
      err += p.error;
      copy.pop();
    }
    return err;
  };

  std::array<double, M> sum{};
  double err = totals(sum);
  while (err > std::max(opt.abs_tol, opt.rel_tol * detail::max_norm(sum))) {
    if (static_cast<int>(heap.size()) >= opt.max_panels) {
      const double achieved = err / std::max(detail::max_norm(sum), 1e-300);
      throw NumericalError("adaptive quadrature did not converge (achieved relative tolerance " +
                               std::to_string(achieved) + ")",
                           achieved);
    }
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = make_panel(worst.a, mid);
    Panel right = make_panel(mid, worst.b);
    for (std::size_t m = 0; m < M; ++m) sum[m] += left.value[m] + right.value[m] - worst.value[m];
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    if (err < 0.0) err = totals(sum);
  }
  out.value = sum;
  out.error = err;
  out.panels = static_cast<int>(heap.size());
  return out;
}

template <class F>
double integrate_scalar(const F& f, double a, double b, const QuadratureOptions& opt = {},
                        std::span<const double> breaks = {}) {
  auto vf = [&](double x) { return std::array<double, 1>{f(x)}; };
  return integrate_adaptive<1>(vf, a, b, opt, breaks).value[0];
}

/// Composite Simpson's rule on `points` equally spaced nodes (odd, >= 3).
double simpson(std::span<const double> values, double a, double b);

template <class F>
double simpson(const F& f, double a, double b, int points) {
  std::vector<double> values(static_cast<std::size_t>(points));
  const double h = (b - a) / (points - 1);
  for (int k = 0; k < points; ++k) values[static_cast<std::size_t>(k)] = f(a + h * k);
  return simpson(std::span<const double>(values), a, b);
}

}  // namespace fisherpli

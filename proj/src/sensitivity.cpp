#include "fisherpli/sensitivity.hpp"

#include <cmath>

#include "fisherpli/error.hpp"
#include "fisherpli/estimation.hpp"
#include "fisherpli/random.hpp"

namespace fisherpli {

namespace {

struct Runs {
  std::vector<double> a, b;
  std::vector<std::vector<double>> ab;
};

Runs run_designs(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n,
                 std::uint64_t seed, Parallelism par) {
  const std::size_t d = specs.size();
  const auto xa = draw_inputs(specs, n, derive_seed(seed, 1));
  const auto xb = draw_inputs(specs, n, derive_seed(seed, 2));
  Runs runs;
  runs.a = evaluate_rows(model, xa, d, par);
  runs.b = evaluate_rows(model, xb, d, par);
  runs.ab.resize(d);
  std::vector<double> hybrid(xb);
  for (std::size_t i = 0; i < d; ++i) {
    hybrid = xb;
    for (std::size_t r = 0; r < n; ++r) hybrid[r * d + i] = xa[r * d + i];
    try {
      runs.ab[i] = evaluate_rows(model, hybrid, d, par);
    } catch (const Error& e) {
      throw DomainError("hybrid design for input x" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return runs;
}

struct Ratio {
  double value, se;
};

// a / b with numerator terms u and denominator terms w, delta-method se.
Ratio ratio_estimate(const std::vector<double>& u, const std::vector<double>& w) {
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mw = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    mu += u[k];
    mw += w[k];
  }
  mu /= n;
  mw /= n;
  double vu = 0.0, vw = 0.0, cuw = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    vu += (u[k] - mu) * (u[k] - mu);
    vw += (w[k] - mw) * (w[k] - mw);
    cuw += (u[k] - mu) * (w[k] - mw);
  }
  vu /= n - 1.0;
  vw /= n - 1.0;
  cuw /= n - 1.0;
  const double r = mu / mw;
  const double var = (vu - 2.0 * r * cuw + r * r * vw) / (mw * mw * n);
  return {r, std::sqrt(std::max(var, 0.0))};
}

struct Part {
  std::vector<Ratio> first, total;
  double variance;
  bool degenerate;
};

Part indices_from(const std::vector<double>& ya, const std::vector<double>& yb,
                  const std::vector<std::vector<double>>& yab) {
  const std::size_t n = ya.size();
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k) m += ya[k] + yb[k];
  m /= 2.0 * static_cast<double>(n);
  std::vector<double> w(n);
  double v = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 * ((ya[k] - m) * (ya[k] - m) + (yb[k] - m) * (yb[k] - m));
    v += w[k];
  }
  v /= static_cast<double>(n);
  Part part;
  part.variance = v;
  part.degenerate = !(v > 1e-300);
  const std::size_t d = yab.size();
  part.first.assign(d, {0.0, 0.0});
  part.total.assign(d, {0.0, 0.0});
  if (part.degenerate) return part;
  std::vector<double> u(n);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < n; ++k) u[k] = (ya[k] - m) * (yab[i][k] - yb[k]);
    part.first[i] = ratio_estimate(u, w);
    for (std::size_t k = 0; k < n; ++k) u[k] = 0.5 * (yb[k] - yab[i][k]) * (yb[k] - yab[i][k]);
    part.total[i] = ratio_estimate(u, w);
  }
  return part;
}

std::vector<double> indicator(const std::vector<double>& y, double t) {
  std::vector<double> out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k] > t ? 1.0 : 0.0;
  return out;
}

SobolResult assemble(const Runs& runs, std::size_t n, std::optional<double> threshold) {
  const std::size_t d = runs.ab.size();
  SobolResult res;
  res.n_base = n;
  res.evaluations = (d + 2) * n;
  res.indices.resize(d);
  const Part var = indices_from(runs.a, runs.b, runs.ab);
  res.variance = var.variance;
  if (var.degenerate) res.warnings.push_back("output variance is zero; indices set to 0");
  for (std::size_t i = 0; i < d; ++i) {
    res.indices[i].first_order = var.first[i].value;
    res.indices[i].se_first_order = var.first[i].se;
    res.indices[i].total = var.total[i].value;
    res.indices[i].se_total = var.total[i].se;
  }
  if (threshold) {
    res.threshold = threshold;
    std::vector<std::vector<double>> iab(d);
    for (std::size_t i = 0; i < d; ++i) iab[i] = indicator(runs.ab[i], *threshold);
    const Part tgt = indices_from(indicator(runs.a, *threshold), indicator(runs.b, *threshold), iab);
    res.target_variance = tgt.variance;
    if (tgt.degenerate) res.warnings.push_back("indicator variance is zero; target indices set to 0");
    for (std::size_t i = 0; i < d; ++i) {
      res.indices[i].target_first_order = tgt.first[i].value;
      res.indices[i].se_target_first_order = tgt.first[i].se;
      res.indices[i].target_total = tgt.total[i].value;
      res.indices[i].se_target_total = tgt.total[i].se;
    }
  }
  return res;
}

void check_args(const std::vector<DistributionSpec>& specs, std::size_t n) {
  if (specs.empty()) throw DomainError("sobol: no inputs");
  if (n < 2) throw DomainError("sobol: N_base must be at least 2");
}

}  // namespace

SobolResult sobol_pick_freeze(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n_base,
                              std::uint64_t seed, Parallelism parallelism) {
  check_args(specs, n_base);
  return assemble(run_designs(model, specs, n_base, seed, parallelism), n_base, std::nullopt);
}

SobolResult sobol_target(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n_base,
                         double threshold, std::uint64_t seed, Parallelism parallelism) {
  check_args(specs, n_base);
  if (!std::isfinite(threshold)) throw DomainError("sobol: threshold must be finite");
  return assemble(run_designs(model, specs, n_base, seed, parallelism), n_base, threshold);
}

SobolResult sobol_indices(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n_base,
                          std::uint64_t seed, std::optional<double> threshold, double alpha,
                          Parallelism parallelism) {
  check_args(specs, n_base);
  if (threshold && !std::isfinite(*threshold)) throw DomainError("sobol: threshold must be finite");
  const Runs runs = run_designs(model, specs, n_base, seed, parallelism);
  if (!threshold) {
    std::vector<double> pooled(runs.a);
    pooled.insert(pooled.end(), runs.b.begin(), runs.b.end());
    threshold = empirical_quantile(pooled, alpha);
  }
  return assemble(runs, n_base, threshold);
}

}  // namespace fisherpli

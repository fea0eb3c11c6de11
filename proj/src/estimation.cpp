#include "fisherpli/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fisherpli/error.hpp"
#include "fisherpli/random.hpp"

namespace fisherpli {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie strictly inside (0, 1)");
}

// Relative slack so that k/N computed in floating point matches ceil(alpha N).
constexpr double kLevelSlack = 1e-12;

}  // namespace

IOSample::IOSample(std::vector<DistributionSpec> input_specs, std::vector<double> inputs,
                   std::vector<double> outputs)
    : specs_(std::move(input_specs)), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  const std::size_t d = specs_.size();
  if (d == 0) throw DomainError("IOSample: at least one input is required");
  if (inputs_.size() != d * outputs_.size())
    throw DomainError("IOSample: expected " + std::to_string(d * outputs_.size()) + " input values for " +
                      std::to_string(outputs_.size()) + " rows of " + std::to_string(d) + " inputs, got " +
                      std::to_string(inputs_.size()));
  for (std::size_t n = 0; n < outputs_.size(); ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      const double x = inputs_[n * d + i];
      if (!specs_[i].support().contains(x) || std::isnan(x)) {
        std::ostringstream os;
        os << "IOSample: row " << n + 1 << " input x" << i + 1 << " = " << x << " lies outside the support ["
           << specs_[i].support().lo << ", " << specs_[i].support().hi << "]";
        throw DomainError(os.str());
      }
    }
  }
}

std::vector<double> IOSample::column(std::size_t i) const {
  std::vector<double> col(size());
  for (std::size_t n = 0; n < size(); ++n) col[n] = input(n, i);
  return col;
}

IOSample IOSample::subset(std::span<const std::size_t> rows) const {
  const std::size_t d = dimension();
  std::vector<double> in(rows.size() * d);
  std::vector<double> out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::copy_n(inputs_.begin() + static_cast<std::ptrdiff_t>(rows[k] * d), d,
                in.begin() + static_cast<std::ptrdiff_t>(k * d));
    out[k] = outputs_[rows[k]];
  }
  return IOSample(specs_, std::move(in), std::move(out));
}

bool reaches_level(double cumulative, double alpha, double total) noexcept {
  return cumulative >= alpha * total * (1.0 - kLevelSlack);
}

double empirical_quantile(std::span<const double> outputs, double alpha) {
  check_alpha(alpha);
  const std::size_t n = outputs.size();
  if (n == 0) throw DomainError("empirical_quantile: empty sample");
  // smallest k with k >= alpha * N (up to the shared slack)
  std::size_t k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) * (1.0 - kLevelSlack)));
  k = std::clamp<std::size_t>(k, 1, n);
  std::vector<double> buf(outputs.begin(), outputs.end());
  std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k - 1), buf.end());
  return buf[k - 1];
}

WeightedCdf::WeightedCdf(std::span<const double> outputs, std::span<const double> ratios) {
  if (outputs.size() != ratios.size()) throw DomainError("WeightedCdf: outputs and ratios differ in length");
  if (outputs.empty()) throw DomainError("WeightedCdf: empty sample");
  std::vector<std::size_t> order(outputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return outputs[a] < outputs[b]; });
  values_.resize(order.size());
  weights_.resize(order.size());
  cumulative_.resize(order.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double w = ratios[order[k]];
    if (!(w >= 0.0) || !std::isfinite(w)) throw NumericalError("WeightedCdf: weights must be finite and >= 0");
    values_[k] = outputs[order[k]];
    acc += w;
    cumulative_[k] = acc;
  }
  total_ = acc;
  if (!(total_ > 0.0)) throw NumericalError("WeightedCdf: all weights are zero");
  for (std::size_t k = 0; k < order.size(); ++k) weights_[k] = ratios[order[k]] / total_;
}

double WeightedCdf::operator()(double t) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), t);
  if (it == values_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1] / total_;
}

double WeightedCdf::quantile(double alpha) const {
  check_alpha(alpha);
  for (std::size_t k = 0; k < values_.size(); ++k)
    if (reaches_level(cumulative_[k], alpha, total_)) return values_[k];
  return values_.back();
}

Tail tail_for(double alpha) noexcept { return alpha >= 0.5 ? Tail::Upper : Tail::Lower; }

SortedOutputs::SortedOutputs(std::span<const double> outputs) : order_(outputs.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return outputs[a] < outputs[b]; });
  sorted_.resize(order_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) sorted_[k] = outputs[order_[k]];
}

PerturbedQuantile SortedOutputs::counts_for(double q) const {
  const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), q);
  const auto hi = std::upper_bound(sorted_.begin(), sorted_.end(), q);
  return {q, static_cast<std::size_t>(sorted_.end() - hi), static_cast<std::size_t>(lo - sorted_.begin())};
}

PerturbedQuantile SortedOutputs::weighted_quantile(std::span<const double> ratios, double alpha) const {
  check_alpha(alpha);
  if (sorted_.empty()) throw DomainError("perturbed_quantile: empty sample");
  if (ratios.size() != order_.size()) throw DomainError("perturbed_quantile: ratio count differs from sample size");
  double total = 0.0;
  for (std::size_t k = 0; k < order_.size(); ++k) {
    const double w = ratios[order_[k]];
    if (!(w >= 0.0) || !std::isfinite(w)) throw NumericalError("perturbed_quantile: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw NumericalError("perturbed_quantile: all weights are zero");
  double acc = 0.0;
  for (std::size_t k = 0; k < order_.size(); ++k) {
    acc += ratios[order_[k]];
    if (reaches_level(acc, alpha, total)) return counts_for(sorted_[k]);
  }
  return counts_for(sorted_.back());
}

PerturbedQuantile SortedOutputs::empirical(double alpha) const {
  check_alpha(alpha);
  const std::size_t n = sorted_.size();
  if (n == 0) throw DomainError("empirical_quantile: empty sample");
  std::size_t k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) * (1.0 - kLevelSlack)));
  k = std::clamp<std::size_t>(k, 1, n);
  return counts_for(sorted_[k - 1]);
}

bool admissible(std::size_t exceed_count, double /*alpha*/, Tail /*tail*/) noexcept {
  return exceed_count >= kMinTailCount;
}

std::vector<double> likelihood_ratios(const IOSample& sample, std::size_t i,
                                      const std::function<double(double)>& perturbed_pdf) {
  if (i >= sample.dimension()) throw DomainError("likelihood_ratios: input index out of range");
  const DistributionSpec& nominal = sample.input_specs()[i];
  std::vector<double> out(sample.size());
  for (std::size_t n = 0; n < sample.size(); ++n) {
    const double x = sample.input(n, i);
    const double f0 = pdf(nominal, x);
    if (!(f0 > 0.0)) {
      std::ostringstream os;
      os << "likelihood_ratios: nominal density is zero at row " << n + 1 << " (x" << i + 1 << " = " << x << ")";
      throw NumericalError(os.str());
    }
    out[n] = perturbed_pdf(x) / f0;
  }
  return out;
}

std::vector<double> likelihood_ratios(const IOSample& sample, std::size_t i, const DistributionSpec& perturbed) {
  if (i >= sample.dimension()) throw DomainError("likelihood_ratios: input index out of range");
  if (!(perturbed.support() == sample.input_specs()[i].support()))
    throw DomainError("likelihood_ratios: perturbed law must share the nominal support");
  return likelihood_ratios(sample, i, [&](double x) { return pdf(perturbed, x); });
}

PerturbedQuantile perturbed_quantile(std::span<const double> outputs, std::span<const double> ratios,
                                     double alpha) {
  return SortedOutputs(outputs).weighted_quantile(ratios, alpha);
}

PerturbedQuantile perturbed_quantile(const IOSample& sample, std::size_t i, const DistributionSpec& perturbed,
                                     double alpha) {
  const auto ratios = likelihood_ratios(sample, i, perturbed);
  return perturbed_quantile(sample.outputs(), ratios, alpha);
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t replicate) {
  Rng rng(derive_seed(seed, 0xb007u, replicate));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
  return rows;
}

double percentile_sorted(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw DomainError("percentile of an empty set");
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BootstrapResult summarize_replicates(const std::vector<double>& values, const std::vector<char>& ok) {
  BootstrapResult res;
  res.replicates = values.size();
  for (std::size_t b = 0; b < values.size(); ++b)
    if (ok[b]) res.values.push_back(values[b]);
  res.dropped = res.replicates - res.values.size();
  if (res.values.empty() || res.dropped * 5 > res.replicates)
    throw NumericalError("bootstrap: " + std::to_string(res.dropped) + " of " + std::to_string(res.replicates) +
                         " replicates failed (more than 20%)");
  std::vector<double> sorted = res.values;
  std::sort(sorted.begin(), sorted.end());
  res.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  res.lo95 = percentile_sorted(sorted, 0.025);
  res.hi95 = percentile_sorted(sorted, 0.975);
  return res;
}

BootstrapResult bootstrap_replicates(int B, const std::function<double(std::size_t)>& statistic,
                                     Parallelism parallelism) {
  if (B < 2) throw DomainError("bootstrap: B must be >= 2");
  std::vector<double> values(static_cast<std::size_t>(B));
  std::vector<char> ok(static_cast<std::size_t>(B), 0);
  parallel_for(static_cast<std::size_t>(B), parallelism, [&](std::size_t b) {
    try {
      const double v = statistic(b);
      if (std::isfinite(v)) {
        values[b] = v;
        ok[b] = 1;
      }
    } catch (const Error&) {
      // dropped replicate
    }
  });
  return summarize_replicates(values, ok);
}

BootstrapResult bootstrap(const IOSample& sample, const std::function<double(const IOSample&)>& statistic, int B,
                          std::uint64_t seed, Parallelism parallelism) {
  if (sample.empty()) throw DomainError("bootstrap: empty sample");
  return bootstrap_replicates(
      B,
      [&](std::size_t b) {
        const auto rows = bootstrap_rows(sample.size(), seed, b);
        return statistic(sample.subset(rows));
      },
      parallelism);
}

}  // namespace fisherpli

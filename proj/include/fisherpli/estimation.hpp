#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fisherpli/distributions.hpp"
#include "fisherpli/parallel.hpp"

namespace fisherpli {

/// N model runs: row n of the inputs produced outputs[n]. The nominal input
/// laws travel with the sample so likelihood ratios can be formed against it.
class IOSample {
 public:
  /// inputs is row-major N x d. Throws DomainError when sizes disagree or an
  /// input lies outside its law's support (the message names the row).
  IOSample(std::vector<DistributionSpec> input_specs, std::vector<double> inputs, std::vector<double> outputs);

  std::size_t size() const noexcept { return outputs_.size(); }
  std::size_t dimension() const noexcept { return specs_.size(); }
  bool empty() const noexcept { return outputs_.empty(); }

  double input(std::size_t row, std::size_t column) const { return inputs_[row * specs_.size() + column]; }
  std::span<const double> row(std::size_t n) const {
    return {inputs_.data() + n * specs_.size(), specs_.size()};
  }
  std::vector<double> column(std::size_t i) const;
  std::span<const double> outputs() const noexcept { return outputs_; }
  std::span<const double> inputs() const noexcept { return inputs_; }
  const std::vector<DistributionSpec>& input_specs() const noexcept { return specs_; }

  /// Rows picked by index (with repetition); input/output pairing is kept.
  IOSample subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<DistributionSpec> specs_;
  std::vector<double> inputs_;
  std::vector<double> outputs_;
};

/// True when a running weight sum has reached alpha * total. Shared by the
/// empirical and weighted estimators so uniform weights reproduce the
/// empirical quantile exactly.
bool reaches_level(double cumulative, double alpha, double total) noexcept;

/// inf{t : F_N(t) >= alpha}, i.e. the ceil(alpha N)-th order statistic.
/// Throws DomainError on an empty sample or alpha outside (0, 1).
double empirical_quantile(std::span<const double> outputs, double alpha);

/// Self-normalized weighted empirical cdf over sorted outputs.
class WeightedCdf {
 public:
  /// ratios[n] weights outputs[n]; throws NumericalError when all are zero.
  WeightedCdf(std::span<const double> outputs, std::span<const double> ratios);

  double operator()(double t) const;
  /// First sorted output whose cumulative weight reaches alpha.
  double quantile(double alpha) const;

  std::span<const double> sorted_outputs() const noexcept { return values_; }
  /// Normalized weights aligned with sorted_outputs(); they sum to 1.
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // unnormalized running sums
  double total_ = 0.0;
};

enum class Tail { Upper, Lower };

/// Upper tail for alpha >= 1/2, lower tail otherwise.
Tail tail_for(double alpha) noexcept;

struct PerturbedQuantile {
  double quantile;
  std::size_t n_above;  // outputs strictly above the quantile
  std::size_t n_below;  // outputs strictly below the quantile

  std::size_t exceed_count(Tail tail) const noexcept { return tail == Tail::Upper ? n_above : n_below; }
};

/// Outputs pre-sorted once (stable on ties) so that many weightings of the
/// same sample each cost O(N).
class SortedOutputs {
 public:
  explicit SortedOutputs(std::span<const double> outputs);

  std::size_t size() const noexcept { return order_.size(); }
  std::span<const double> values() const noexcept { return sorted_; }

  /// ratios are indexed by original row.
  PerturbedQuantile weighted_quantile(std::span<const double> ratios, double alpha) const;
  PerturbedQuantile empirical(double alpha) const;

 private:
  PerturbedQuantile counts_for(double q) const;
  std::vector<std::size_t> order_;
  std::vector<double> sorted_;
};

/// Min count of sample outputs beyond a perturbed quantile for the estimate
/// to be trusted.
inline constexpr std::size_t kMinTailCount = 10;

/// exceed_count is the number of outputs strictly beyond the quantile on
/// the given tail; alpha only selects the default tail elsewhere.
bool admissible(std::size_t exceed_count, double alpha, Tail tail) noexcept;

/// f_perturbed(x_i) / f_nominal(x_i) for every row. Throws NumericalError
/// naming the row when the nominal density vanishes at an observed point.
std::vector<double> likelihood_ratios(const IOSample& sample, std::size_t i,
                                      const std::function<double(double)>& perturbed_pdf);
std::vector<double> likelihood_ratios(const IOSample& sample, std::size_t i, const DistributionSpec& perturbed);

/// Reverse importance sampling estimate of the perturbed alpha-quantile.
PerturbedQuantile perturbed_quantile(std::span<const double> outputs, std::span<const double> ratios,
                                     double alpha);
PerturbedQuantile perturbed_quantile(const IOSample& sample, std::size_t i, const DistributionSpec& perturbed,
                                     double alpha);

struct BootstrapResult {
  double mean = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
  std::size_t replicates = 0;
  std::size_t dropped = 0;
  std::vector<double> values;  // kept replicates, in replicate order
};

inline constexpr int kDefaultBootstrap = 200;

/// Row indices for bootstrap replicate b (uniform draws with replacement).
std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t replicate);

/// Percentile of `sorted` by linear interpolation between order statistics.
double percentile_sorted(std::span<const double> sorted, double level);

/// Percentile summary of replicate values; ok[b] == 0 marks a dropped
/// replicate. More than 20% dropped raises NumericalError.
BootstrapResult summarize_replicates(const std::vector<double>& values, const std::vector<char>& ok);

/// Generic replicate driver: statistic(b) computes replicate b. Failing
/// replicates are dropped; more than 20% dropped raises NumericalError.
BootstrapResult bootstrap_replicates(int B, const std::function<double(std::size_t)>& statistic,
                                     Parallelism parallelism = {});

/// Resamples rows of the sample B times; percentile 2.5 / 97.5 interval.
BootstrapResult bootstrap(const IOSample& sample, const std::function<double(const IOSample&)>& statistic, int B,
                          std::uint64_t seed, Parallelism parallelism = {});

}  // namespace fisherpli

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fisherpli/distributions.hpp"
#include "fisherpli/models.hpp"
#include "fisherpli/parallel.hpp"

namespace fisherpli {

struct SobolIndex {
  double first_order = 0.0;
  double total = 0.0;
  double target_first_order = 0.0;
  double target_total = 0.0;
  // Delta-method plug-in standard errors.
  double se_first_order = 0.0;
  double se_total = 0.0;
  double se_target_first_order = 0.0;
  double se_target_total = 0.0;
};

struct SobolResult {
  std::vector<SobolIndex> indices;
  std::size_t n_base = 0;
  std::size_t evaluations = 0;  // (d + 2) * n_base
  double variance = 0.0;
  std::optional<double> threshold;  // set when target indices were computed
  double target_variance = 0.0;
  std::vector<std::string> warnings;
};

/// Pick-freeze with two independent designs A and B and hybrids AB_i (B with
/// column i taken from A):
///   S_i = mean(y_A (y_ABi - y_B)) / V,   T_i = mean((y_B - y_ABi)^2) / (2 V).
/// A zero variance yields zero indices and a warning.
SobolResult sobol_pick_freeze(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n_base,
                              std::uint64_t seed, Parallelism parallelism = {});

/// Same machinery on the indicator 1(Y > threshold). The variance-based
/// indices are filled too since they come from the same runs.
SobolResult sobol_target(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n_base,
                         double threshold, std::uint64_t seed, Parallelism parallelism = {});

/// Both parts; the threshold defaults to the empirical alpha-quantile of the
/// pooled A and B outputs.
SobolResult sobol_indices(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n_base,
                          std::uint64_t seed, std::optional<double> threshold, double alpha = 0.95,
                          Parallelism parallelism = {});

}  // namespace fisherpli

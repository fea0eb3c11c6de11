#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fisherpli/distributions.hpp"
#include "fisherpli/estimation.hpp"
#include "fisherpli/parallel.hpp"

namespace fisherpli {

/// A scalar computer model G evaluated on one input row.
using Model = std::function<double(std::span<const double>)>;

double ishigami(double x1, double x2, double x3) noexcept;

/// Maximal annual water level. Throws DomainError unless Ks > 0 and Zm > Zv.
double flood(double q, double ks, double zv, double zm);

enum class ModelKind { Ishigami, Flood, External };

std::string_view model_kind_name(ModelKind kind) noexcept;
/// Throws DomainError for an unknown name.
ModelKind model_kind_from_name(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::Ishigami;
  std::vector<DistributionSpec> input_specs;
  std::filesystem::path sample_path;  // External only

  /// Built-in kinds with their reference input laws.
  static ModelSpec ishigami();
  static ModelSpec flood();
  static ModelSpec external(std::vector<DistributionSpec> input_specs, std::filesystem::path path);

  /// Throws DomainError when the input count does not match the kind.
  void validate() const;
};

std::vector<DistributionSpec> ishigami_inputs();
/// Q ~ Gumbel(1013, 558) on [500, 3000], Ks ~ N(30, 7.5) on [15, 75],
/// Zv ~ T(49, 50, 51), Zm ~ T(54, 55, 56).
std::vector<DistributionSpec> flood_inputs();

/// The callable behind a built-in kind. External raises UnsupportedFamilyError
/// since no new runs can be made.
Model model_function(ModelKind kind);

/// Evaluates the model on every row of a row-major N x d matrix. A failing
/// row is reported by its 1-based index.
std::vector<double> evaluate_rows(const Model& model, std::span<const double> inputs, std::size_t d,
                                  Parallelism parallelism = {});

/// Inverse-transform draws for every input, column i seeded from
/// derive_seed(seed, i).
std::vector<double> draw_inputs(const std::vector<DistributionSpec>& specs, std::size_t n, std::uint64_t seed);

IOSample generate_sample(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n,
                         std::uint64_t seed, Parallelism parallelism = {});
IOSample generate_sample(const ModelSpec& model, std::size_t n, std::uint64_t seed, Parallelism parallelism = {});

/// CSV with header x1,...,xd,y. Throws IoError on unreadable or malformed
/// files, DomainError on a dimension mismatch or rows outside the supports
/// (all offending rows are listed).
IOSample load_sample(const std::filesystem::path& path, const std::vector<DistributionSpec>& specs);
void save_sample(const std::filesystem::path& path, const IOSample& sample);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace fisherpli

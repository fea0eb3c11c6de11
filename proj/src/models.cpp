#include "fisherpli/models.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fisherpli/error.hpp"
#include "fisherpli/random.hpp"

namespace fisherpli {

double ishigami(double x1, double x2, double x3) noexcept {
  const double s2 = std::sin(x2);
  return std::sin(x1) + 7.0 * s2 * s2 + 0.1 * std::pow(x3, 4) * std::sin(x1);
}

double flood(double q, double ks, double zv, double zm) {
  if (!(ks > 0.0)) throw DomainError("flood: Ks must be positive");
  if (!(zm > zv)) throw DomainError("flood: Zm must exceed Zv");
  return std::pow(q / (300.0 * ks * std::sqrt(2e-4 * (zm - zv))), 0.6);
}

std::string_view model_kind_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Ishigami: return "ishigami";
    case ModelKind::Flood: return "flood";
    case ModelKind::External: return "external";
  }
  return "unknown";
}

ModelKind model_kind_from_name(std::string_view name) {
  if (name == "ishigami") return ModelKind::Ishigami;
  if (name == "flood") return ModelKind::Flood;
  if (name == "external") return ModelKind::External;
  throw DomainError("unknown model '" + std::string(name) + "'");
}

std::vector<DistributionSpec> ishigami_inputs() {
  return {DistributionSpec::normal(0.0, 1.0), DistributionSpec::normal(0.0, 1.0),
          DistributionSpec::normal(0.0, 1.0)};
}

std::vector<DistributionSpec> flood_inputs() {
  return {DistributionSpec::trunc_gumbel(1013.0, 558.0, 500.0, 3000.0),
          DistributionSpec::trunc_normal(30.0, 7.5, 15.0, 75.0), DistributionSpec::triangular(49.0, 50.0, 51.0),
          DistributionSpec::triangular(54.0, 55.0, 56.0)};
}

ModelSpec ModelSpec::ishigami() { return {ModelKind::Ishigami, ishigami_inputs(), {}}; }
ModelSpec ModelSpec::flood() { return {ModelKind::Flood, flood_inputs(), {}}; }
ModelSpec ModelSpec::external(std::vector<DistributionSpec> input_specs, std::filesystem::path path) {
  return {ModelKind::External, std::move(input_specs), std::move(path)};
}

void ModelSpec::validate() const {
  const std::size_t want = kind == ModelKind::Ishigami ? 3 : kind == ModelKind::Flood ? 4 : 0;
  if (want != 0 && input_specs.size() != want)
    throw DomainError(std::string(model_kind_name(kind)) + " takes " + std::to_string(want) + " inputs, got " +
                      std::to_string(input_specs.size()));
  if (input_specs.empty()) throw DomainError("model has no inputs");
}

Model model_function(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ishigami:
      return [](std::span<const double> x) { return ishigami(x[0], x[1], x[2]); };
    case ModelKind::Flood:
      return [](std::span<const double> x) { return flood(x[0], x[1], x[2], x[3]); };
    case ModelKind::External: break;
  }
  throw UnsupportedFamilyError("external models cannot be evaluated; supply an input/output sample");
}

std::vector<double> evaluate_rows(const Model& model, std::span<const double> inputs, std::size_t d,
                                  Parallelism parallelism) {
  if (d == 0) throw DomainError("evaluate_rows: zero inputs");
  const std::size_t n = inputs.size() / d;
  std::vector<double> out(n);
  parallel_for(n, parallelism, [&](std::size_t r) {
    double y;
    try {
      y = model(inputs.subspan(r * d, d));
    } catch (const Error& e) {
      throw DomainError("model failed on row " + std::to_string(r + 1) + ": " + e.what());
    }
    if (!std::isfinite(y)) throw NumericalError("model returned a non-finite value on row " + std::to_string(r + 1));
    out[r] = y;
  });
  return out;
}

std::vector<double> draw_inputs(const std::vector<DistributionSpec>& specs, std::size_t n, std::uint64_t seed) {
  const std::size_t d = specs.size();
  std::vector<double> rows(n * d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto col = sample(specs[i], derive_seed(seed, i), n);
    for (std::size_t r = 0; r < n; ++r) rows[r * d + i] = col[r];
  }
  return rows;
}

IOSample generate_sample(const Model& model, const std::vector<DistributionSpec>& specs, std::size_t n,
                         std::uint64_t seed, Parallelism parallelism) {
  auto inputs = draw_inputs(specs, n, seed);
  auto outputs = evaluate_rows(model, inputs, specs.size(), parallelism);
  return IOSample(specs, std::move(inputs), std::move(outputs));
}

IOSample generate_sample(const ModelSpec& model, std::size_t n, std::uint64_t seed, Parallelism parallelism) {
  model.validate();
  return generate_sample(model_function(model.kind), model.input_specs, n, seed, parallelism);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line_no, const std::filesystem::path& path) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" + std::string(s) +
                  "' as a number");
  return v;
}

}  // namespace

IOSample load_sample(const std::filesystem::path& path, const std::vector<DistributionSpec>& specs) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sample file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  const auto header = split(line);
  const std::size_t d = specs.size();
  if (header.size() < 2 || header.back() != "y")
    throw IoError(path.string() + ": header must be x1,...,xd,y");
  for (std::size_t i = 0; i + 1 < header.size(); ++i)
    if (header[i] != "x" + std::to_string(i + 1)) throw IoError(path.string() + ": header must be x1,...,xd,y");
  if (header.size() - 1 != d)
    throw DomainError(path.string() + ": file has " + std::to_string(header.size() - 1) + " inputs but " +
                      std::to_string(d) + " input laws were given");
  std::vector<double> inputs;
  std::vector<double> outputs;
  std::vector<std::string> bad_rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != d + 1)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(d + 1) +
                    " fields, got " + std::to_string(cells.size()));
    const std::size_t row = outputs.size() + 1;
    std::string offending;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = parse_double(cells[i], line_no, path);
      if (offending.empty() && (std::isnan(x) || !specs[i].support().contains(x)))
        offending = "row " + std::to_string(row) + " (x" + std::to_string(i + 1) + " = " + format_double(x) + ")";
      inputs.push_back(x);
    }
    outputs.push_back(parse_double(cells[d], line_no, path));
    if (!offending.empty()) bad_rows.push_back(offending);
  }
  if (!bad_rows.empty()) {
    std::ostringstream os;
    os << path.string() << ": " << bad_rows.size() << " row(s) outside the input supports: ";
    for (std::size_t k = 0; k < bad_rows.size() && k < 20; ++k) os << (k ? ", " : "") << bad_rows[k];
    if (bad_rows.size() > 20) os << ", ...";
    throw DomainError(os.str());
  }
  return IOSample(specs, std::move(inputs), std::move(outputs));
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void save_sample(const std::filesystem::path& path, const IOSample& sample) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t d = sample.dimension();
  for (std::size_t i = 0; i < d; ++i) out << 'x' << i + 1 << ',';
  out << "y\n";
  for (std::size_t r = 0; r < sample.size(); ++r) {
    for (std::size_t i = 0; i < d; ++i) out << format_double(sample.input(r, i)) << ',';
    out << format_double(sample.outputs()[r]) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fisherpli

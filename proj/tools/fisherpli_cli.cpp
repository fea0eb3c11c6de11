// Command-line front end. Talks to the library through the C API only.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fisherpli.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Failure{kExitConfig, field + ": " + what};
}

int exit_code_for(fpli_status s) {
  switch (s) {
    case FPLI_OK: return kExitOk;
    case FPLI_ERR_NUMERICAL:
    case FPLI_ERR_SPHERE_EMPTY:
    case FPLI_ERR_INTERNAL: return kExitNumerical;
    default: return kExitConfig;
  }
}

void check(fpli_status s, const std::string& context) {
  if (s == FPLI_OK) return;
  throw Failure{exit_code_for(s), context + ": " + fpli_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dist = std::unique_ptr<fpli_distribution, Deleter<fpli_distribution, fpli_distribution_free>>;
using Sample = std::unique_ptr<fpli_sample, Deleter<fpli_sample, fpli_sample_free>>;
using ModelH = std::unique_ptr<fpli_model, Deleter<fpli_model, fpli_model_free>>;
using Sphere = std::unique_ptr<fpli_sphere, Deleter<fpli_sphere, fpli_sphere_free>>;
using Geodesic = std::unique_ptr<fpli_geodesic, Deleter<fpli_geodesic, fpli_geodesic_free>>;
using Curve = std::unique_ptr<fpli_curve, Deleter<fpli_curve, fpli_curve_free>>;
using Sobol = std::unique_ptr<fpli_sobol, Deleter<fpli_sobol, fpli_sobol_free>>;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Csv {
 public:
  explicit Csv(const fs::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Failure{kExitConfig, "output: cannot write " + path.string()};
  }
  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cells, first = false), ...);
    out_ << '\n';
  }
  void raw(const std::string& line) { out_ << line << '\n'; }

 private:
  fs::path path_;
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitConfig, "output: cannot write " + path.string()};
  out << j.dump(2) << '\n';
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kExitConfig, "output: cannot create " + dir.string() + " (" + ec.message() + ")"};
}

// ---- argument parsing helpers ----

double parse_number(const std::string& text, const std::string& field) {
  std::string s = text;
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  while (!s.empty() && s.back() == ' ') s.pop_back();
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.erase(s.begin());
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) config_error(field, "cannot parse '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, field));
  return out;
}

std::uint64_t seed_from_json(const json& j) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    config_error("seed", "must be a non-negative integer");
  return j.get<std::uint64_t>();
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    config_error("seed", "must be a non-negative integer, got '" + text + "'");
  return v;
}

fpli_integrator integrator_from(const std::string& name, const std::string& field) {
  if (name == "adams_moulton" || name == "am") return FPLI_ADAMS_MOULTON;
  if (name == "euler") return FPLI_EULER;
  config_error(field, "unknown integrator '" + name + "' (expected adams_moulton or euler)");
}

std::string spec_json_text(const fpli_distribution* d) {
  std::size_t needed = 0;
  check(fpli_distribution_to_json(d, nullptr, 0, &needed), "distribution");
  std::string buf(needed, '\0');
  check(fpli_distribution_to_json(d, buf.data(), buf.size(), &needed), "distribution");
  buf.pop_back();
  return buf;
}

json spec_json(const fpli_distribution* d) { return json::parse(spec_json_text(d)); }

Dist dist_from_json(const json& j, const std::string& field) {
  fpli_distribution* d = nullptr;
  const fpli_status s = fpli_distribution_from_json(j.dump().c_str(), &d);
  if (s != FPLI_OK) {
    std::string msg = fpli_last_error();
    // The library names sub-fields relative to the object it was given.
    if (msg.rfind("input", 0) == 0) msg = field + msg.substr(5);
    else msg = field + ": " + msg;
    throw Failure{kExitConfig, msg};
  }
  return Dist(d);
}

std::vector<double> theta_of(const fpli_distribution* d) {
  std::vector<double> t(fpli_distribution_dimension(d));
  check(fpli_distribution_theta(d, t.data(), t.size()), "distribution");
  return t;
}

std::string describe(const fpli_distribution* d) {
  std::string s = fpli_distribution_family(d);
  s += "(";
  const auto t = theta_of(d);
  for (std::size_t k = 0; k < t.size(); ++k) s += (k ? ", " : "") + num(t[k]);
  double lo, hi;
  check(fpli_distribution_support(d, &lo, &hi), "distribution");
  s += ") on [" + num(lo) + ", " + num(hi) + "]";
  return s;
}

// ---- quick single-object commands ----

struct QuickArgs {
  std::string family = "normal";
  std::string theta = "0,1";
  std::string support;
  double delta = 1.0;
  int k = 100;
  int steps = 1000;
  std::string method = "adams_moulton";
  int direction = 0;
  std::string momentum;
  std::string chart = "natural";
};

Dist quick_dist(const QuickArgs& a) {
  const auto theta = parse_list(a.theta, "theta");
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  if (!a.support.empty()) {
    const auto s = parse_list(a.support, "support");
    if (s.size() != 2) config_error("support", "expected lo,hi");
    lo = s[0];
    hi = s[1];
  }
  fpli_distribution* d = nullptr;
  const fpli_status st = fpli_distribution_create(a.family.c_str(), theta.data(), theta.size(), lo, hi, &d);
  if (st != FPLI_OK) throw Failure{kExitConfig, "family/theta/support: " + std::string(fpli_last_error())};
  return Dist(d);
}

int cmd_fim(const QuickArgs& a, const std::optional<fs::path>& out) {
  const Dist d = quick_dist(a);
  double m[4];
  std::size_t r = 0;
  check(fpli_fisher_information(d.get(), m, &r), "fim");
  json rows = json::array();
  std::ostringstream line;
  line << "I" << "(" << describe(d.get()) << ") = [";
  for (std::size_t i = 0; i < r; ++i) {
    json row = json::array();
    line << (i ? "; " : "");
    for (std::size_t j = 0; j < r; ++j) {
      row.push_back(m[i * r + j]);
      line << (j ? ", " : "") << num(m[i * r + j]);
    }
    rows.push_back(row);
  }
  line << "]";
  std::cout << line.str() << '\n';
  if (out) {
    ensure_dir(*out);
    write_json(*out / "fim.json", {{"distribution", spec_json(d.get())}, {"fisher_information", rows}});
  }
  return kExitOk;
}

int cmd_geodesic(const QuickArgs& a, const fs::path& out) {
  const Dist d = quick_dist(a);
  const std::size_t r = fpli_distribution_dimension(d.get());
  std::vector<double> p0;
  if (!a.momentum.empty()) {
    p0 = parse_list(a.momentum, "momentum");
    if (p0.size() != r) config_error("momentum", "expected " + std::to_string(r) + " components");
  } else {
    if (!(a.delta > 0)) config_error("delta", "must be positive");
    const int K = r == 1 ? 2 : a.k;
    if (a.direction < 0 || a.direction >= K) config_error("direction", "out of range");
    std::vector<double> all(static_cast<std::size_t>(K) * r);
    check(fpli_initial_momenta(d.get(), a.delta, a.k, all.data()), "geodesic");
    p0.assign(all.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(a.direction) * r),
              all.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(a.direction + 1) * r));
  }
  fpli_geodesic* g = nullptr;
  check(fpli_geodesic_integrate(d.get(), p0.data(), r, integrator_from(a.method, "method"), a.steps, &g),
        "geodesic");
  const Geodesic path(g);
  ensure_dir(out);
  Csv csv(out / "geodesic.csv");
  std::string header = "t";
  for (std::size_t j = 1; j <= r; ++j) header += ",q" + std::to_string(j);
  for (std::size_t j = 1; j <= r; ++j) header += ",p" + std::to_string(j);
  csv.raw(header + ",H,delta_H");
  std::vector<double> q(r), p(r);
  for (std::size_t k = 0; k < fpli_geodesic_length(g); ++k) {
    double t, h, drift;
    check(fpli_geodesic_step(g, k, &t, q.data(), p.data(), &h, &drift), "geodesic");
    std::string line = num(t);
    for (double v : q) line += "," + num(v);
    for (double v : p) line += "," + num(v);
    csv.raw(line + "," + num(h) + "," + num(drift));
  }
  const char* status[] = {"complete", "truncated_at_boundary", "failed"};
  std::cout << "geodesic from " << describe(d.get()) << ": " << status[fpli_geodesic_status(g)]
            << ", length " << num(fpli_geodesic_measured_length(g)) << ", max |delta_H| "
            << num(fpli_geodesic_max_drift(g)) << '\n';
  return kExitOk;
}

const char* path_status_name(fpli_path_status s) {
  switch (s) {
    case FPLI_PATH_COMPLETE: return "complete";
    case FPLI_PATH_TRUNCATED: return "truncated_at_boundary";
    case FPLI_PATH_FAILED: return "failed";
  }
  return "failed";
}

int cmd_sphere(const QuickArgs& a, const fs::path& out) {
  const Dist d = quick_dist(a);
  fpli_sphere_options o;
  fpli_sphere_options_default(&o);
  o.k = a.k;
  o.n_steps = a.steps;
  o.method = integrator_from(a.method, "method");
  if (a.chart == "natural") o.chart = FPLI_CHART_NATURAL;
  else if (a.chart == "normal_variance") o.chart = FPLI_CHART_NORMAL_VARIANCE;
  else config_error("chart", "expected natural or normal_variance");
  if (!(a.delta > 0)) config_error("delta", "must be positive");
  fpli_sphere* s = nullptr;
  check(fpli_sphere_create(d.get(), a.delta, &o, &s), "sphere");
  const Sphere sphere(s);
  const std::size_t r = fpli_distribution_dimension(d.get());
  ensure_dir(out);
  Csv csv(out / "sphere.csv");
  std::string header = "direction_index,angle";
  for (std::size_t j = 1; j <= r; ++j) header += ",theta" + std::to_string(j);
  csv.raw(header + ",status,measured_length");
  for (std::size_t k = 0; k < fpli_sphere_size(s); ++k) {
    fpli_sphere_point_info p;
    check(fpli_sphere_point(s, k, &p), "sphere");
    std::string line = std::to_string(p.direction_index) + "," + num(p.angle);
    for (std::size_t j = 0; j < r; ++j) line += "," + num(p.theta[j]);
    csv.raw(line + "," + path_status_name(p.status) + "," + num(p.measured_length));
  }
  std::cout << "sphere of radius " << num(a.delta) << " around " << describe(d.get()) << ": "
            << fpli_sphere_valid_count(s) << " of " << fpli_sphere_size(s) << " points complete\n";
  return kExitOk;
}

// ---- config-driven commands ----

struct RunConfig {
  json raw;  // echo, with command-line overrides applied
  std::string model = "external";
  std::vector<Dist> inputs;
  std::optional<std::string> sample_path;
  std::size_t n = 2000;
  double alpha = 0.95;
  std::vector<double> delta_grid;
  int K = 100;
  int n_steps = 1000;
  fpli_integrator integrator = FPLI_ADAMS_MOULTON;
  int B = 0;
  std::uint64_t seed = 0;
  fpli_estimator mode = FPLI_REVERSE_IS;
  fs::path output = "fisherpli_out";
  std::vector<std::size_t> analyse;  // 0-based
};

struct Overrides {
  std::optional<std::string> seed;
  std::optional<fs::path> out;
  std::optional<int> k;
  std::optional<int> steps;
  std::optional<int> bootstrap;
  std::string deltas;
  std::optional<std::size_t> n;
};

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kExitConfig, "config: cannot read " + path.string()};
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Failure{kExitConfig, "config: " + path.string() + " is not valid JSON (" + e.what() + ")"};
  }
}

void apply_overrides(json& j, const Overrides& o) {
  if (o.seed) j["seed"] = parse_seed(*o.seed);
  if (o.out) j["output"] = o.out->string();
  if (o.k) j["K"] = *o.k;
  if (o.steps) j["n_steps"] = *o.steps;
  if (o.bootstrap) j["B"] = *o.bootstrap;
  if (!o.deltas.empty()) j["delta_grid"] = parse_list(o.deltas, "delta_grid");
  if (o.n) j["n"] = *o.n;
}

template <class T>
T get_field(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    config_error(key, "has the wrong type");
  }
}

RunConfig parse_config(json j, bool need_grid) {
  RunConfig c;
  if (!j.is_object()) config_error("config", "expected a JSON object");
  c.raw = j;
  if (!j.contains("seed")) config_error("seed", "is required");
  c.seed = seed_from_json(j["seed"]);
  c.model = get_field<std::string>(j, "model", "external");
  if (c.model != "ishigami" && c.model != "flood" && c.model != "external")
    config_error("model", "expected ishigami, flood or external");
  if (j.contains("inputs")) {
    const json& in = j["inputs"];
    if (!in.is_array() || in.empty()) config_error("inputs", "expected a non-empty array");
    for (std::size_t k = 0; k < in.size(); ++k) c.inputs.push_back(dist_from_json(in[k], "inputs[" + std::to_string(k) + "]"));
  } else if (c.model != "external") {
    std::size_t d = 0;
    check(fpli_model_default_inputs(c.model.c_str(), nullptr, 0, &d), "inputs");
    std::vector<fpli_distribution*> raw(d);
    check(fpli_model_default_inputs(c.model.c_str(), raw.data(), d, &d), "inputs");
    for (auto* p : raw) c.inputs.emplace_back(p);
  } else {
    config_error("inputs", "required for an external model");
  }
  const std::size_t want = c.model == "ishigami" ? 3 : c.model == "flood" ? 4 : 0;
  if (want && c.inputs.size() != want)
    config_error("inputs", c.model + " takes " + std::to_string(want) + " inputs, got " + std::to_string(c.inputs.size()));
  if (j.contains("sample")) {
    if (!j["sample"].is_string()) config_error("sample", "expected a file path");
    c.sample_path = j["sample"].get<std::string>();
  } else if (c.model == "external") {
    config_error("sample", "required for an external model");
  }
  const auto n = get_field<std::int64_t>(j, "n", 2000);
  if (n < 1) config_error("n", "must be positive");
  c.n = static_cast<std::size_t>(n);
  c.alpha = get_field<double>(j, "alpha", 0.95);
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) config_error("alpha", "must lie strictly between 0 and 1, got " + num(c.alpha));
  if (j.contains("delta_grid")) {
    if (!j["delta_grid"].is_array()) config_error("delta_grid", "expected an array");
    for (const auto& v : j["delta_grid"]) {
      if (!v.is_number()) config_error("delta_grid", "expected numbers");
      c.delta_grid.push_back(v.get<double>());
    }
  } else if (need_grid) {
    config_error("delta_grid", "is required");
  }
  for (std::size_t k = 0; k < c.delta_grid.size(); ++k) {
    if (!(c.delta_grid[k] > 0.0)) config_error("delta_grid", "values must be positive");
    if (k > 0 && !(c.delta_grid[k] > c.delta_grid[k - 1])) config_error("delta_grid", "must be strictly increasing");
  }
  c.K = get_field<int>(j, "K", 100);
  if (c.K < 2) config_error("K", "must be at least 2");
  c.n_steps = get_field<int>(j, "n_steps", 1000);
  if (c.n_steps < 10) config_error("n_steps", "must be at least 10");
  c.integrator = integrator_from(get_field<std::string>(j, "integrator", "adams_moulton"), "integrator");
  c.B = get_field<int>(j, "B", 0);
  if (c.B < 0 || c.B == 1) config_error("B", "must be 0 (no intervals) or at least 2");
  const std::string mode = get_field<std::string>(j, "mode", "reverse_is");
  if (mode == "reverse_is") c.mode = FPLI_REVERSE_IS;
  else if (mode == "resample") c.mode = FPLI_RESAMPLE;
  else config_error("mode", "expected reverse_is or resample");
  if (c.mode == FPLI_RESAMPLE && c.model == "external")
    config_error("mode", "resampling needs a built-in model; external samples support reverse_is only");
  c.output = get_field<std::string>(j, "output", "fisherpli_out");
  if (j.contains("analyse")) {
    if (!j["analyse"].is_array()) config_error("analyse", "expected an array of 1-based input indices");
    for (const auto& v : j["analyse"]) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1 ||
          static_cast<std::size_t>(v.get<std::int64_t>()) > c.inputs.size())
        config_error("analyse", "index out of range");
      c.analyse.push_back(static_cast<std::size_t>(v.get<std::int64_t>() - 1));
    }
  } else {
    for (std::size_t i = 0; i < c.inputs.size(); ++i) c.analyse.push_back(i);
  }
  return c;
}

std::vector<const fpli_distribution*> raw_inputs(const RunConfig& c) {
  std::vector<const fpli_distribution*> out;
  for (const auto& d : c.inputs) out.push_back(d.get());
  return out;
}

ModelH make_model(const RunConfig& c) {
  if (c.model == "external") return nullptr;
  fpli_model* m = nullptr;
  check(fpli_model_builtin(c.model.c_str(), &m), "model");
  return ModelH(m);
}

Sample make_sample(const RunConfig& c, const fpli_model* model) {
  const auto specs = raw_inputs(c);
  fpli_sample* s = nullptr;
  if (c.sample_path) {
    const fpli_status st = fpli_sample_load(c.sample_path->c_str(), specs.data(), specs.size(), &s);
    if (st != FPLI_OK) throw Failure{kExitConfig, "sample: " + std::string(fpli_last_error())};
  } else {
    check(fpli_sample_generate(model, specs.data(), specs.size(), c.n, c.seed, &s), "sample");
  }
  return Sample(s);
}

json manifest_base(const std::string& command, const RunConfig& c) {
  json m;
  m["tool"] = "fisherpli";
  m["version"] = fpli_version();
  m["command"] = command;
  m["config"] = c.raw;
  m["seed"] = c.raw["seed"];
  m["warnings"] = json::array();
  m["files"] = json::array();
  return m;
}

void finish_manifest(json& m, const fs::path& out, std::chrono::steady_clock::time_point start) {
  m["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(out / "manifest.json", m);
}

void warn(json& manifest, const std::string& text) {
  std::cerr << "warning: " << text << '\n';
  manifest["warnings"].push_back(text);
}

int run_ofpli(const std::string& command, RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  ensure_dir(c.output);
  json manifest = manifest_base(command, c);
  const ModelH model = make_model(c);
  const Sample sample = make_sample(c, model.get());
  manifest["sample_size"] = fpli_sample_size(sample.get());
  manifest["inputs"] = json::array();
  if (c.delta_grid.empty()) {
    warn(manifest, "empty delta grid; nothing to compute");
    finish_manifest(manifest, c.output, start);
    return kExitOk;
  }
  fpli_ofpli_options o;
  fpli_ofpli_options_default(&o);
  o.alpha = c.alpha;
  o.k = c.K;
  o.n_steps = c.n_steps;
  o.method = c.integrator;
  o.estimator = c.mode;
  o.bootstrap = c.B;
  o.seed = c.seed;
  o.model = model.get();
  for (std::size_t i : c.analyse) {
    const fpli_distribution* spec = c.inputs[i].get();
    const std::string tag = "x" + std::to_string(i + 1);
    json entry = {{"input", i + 1}, {"distribution", spec_json(spec)}};
    fpli_curve* raw = nullptr;
    const fpli_status st = fpli_ofpli_curve(sample.get(), i, c.delta_grid.data(), c.delta_grid.size(), &o, &raw);
    if (st == FPLI_ERR_UNSUPPORTED) {
      warn(manifest, tag + " skipped: " + fpli_last_error());
      entry["skipped"] = true;
      manifest["inputs"].push_back(entry);
      continue;
    }
    check(st, tag);
    const Curve curve(raw);
    const std::size_t r = fpli_distribution_dimension(spec);
    const std::string curve_file = "curve_" + tag + ".csv";
    const std::string sphere_file = "sphere_" + tag + ".csv";
    Csv cc(c.output / curve_file);
    cc.raw("input,delta,s_plus,s_minus,ci_lo_plus,ci_hi_plus,ci_lo_minus,ci_hi_minus,admissible,n_valid");
    Csv sc(c.output / sphere_file);
    std::string sh = "input,delta,direction_index";
    for (std::size_t j = 1; j <= r; ++j) sh += ",theta" + std::to_string(j);
    sc.raw(sh + ",S,admissible");
    json admissible = json::array();
    double best_plus = -std::numeric_limits<double>::infinity();
    double best_minus = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < fpli_curve_levels(raw); ++l) {
      fpli_level_info info;
      check(fpli_curve_level(raw, l, &info), tag);
      cc.row(i + 1, num(info.delta), num(info.s_plus), num(info.s_minus), num(info.ci_lo_plus), num(info.ci_hi_plus),
             num(info.ci_lo_minus), num(info.ci_hi_minus), info.admissible, info.n_valid);
      admissible.push_back(bool(info.admissible));
      if (info.admissible) {
        if (std::isfinite(info.s_plus)) best_plus = std::max(best_plus, info.s_plus);
        if (std::isfinite(info.s_minus)) best_minus = std::min(best_minus, info.s_minus);
      }
      for (std::size_t k = 0; k < info.n_points; ++k) {
        fpli_point_info p;
        check(fpli_curve_point(raw, l, k, &p), tag);
        if (!p.valid) continue;
        std::string line = std::to_string(i + 1) + "," + num(info.delta) + "," + std::to_string(p.direction_index);
        for (std::size_t j = 0; j < r; ++j) line += "," + num(p.theta[j]);
        sc.raw(line + "," + num(p.s) + "," + std::to_string(p.admissible));
      }
    }
    double dmax = 0.0;
    const bool has_dmax = fpli_curve_delta_max(raw, &dmax) != 0;
    entry["admissible"] = admissible;
    entry["delta_max"] = has_dmax ? json(dmax) : json(nullptr);
    entry["files"] = {curve_file, sphere_file};
    manifest["files"].push_back(curve_file);
    manifest["files"].push_back(sphere_file);
    manifest["inputs"].push_back(entry);
    std::cout << tag << " " << describe(spec) << ": max S+ = " << (std::isfinite(best_plus) ? num(best_plus) : "n/a")
              << ", min S- = " << (std::isfinite(best_minus) ? num(best_minus) : "n/a")
              << ", delta_max = " << (has_dmax ? num(dmax) : "none") << '\n';
  }
  finish_manifest(manifest, c.output, start);
  return kExitOk;
}

int run_pli(RunConfig& c, const std::optional<std::string>& perturbed_text, std::optional<int> input_flag) {
  const auto start = std::chrono::steady_clock::now();
  json pj;
  if (perturbed_text) {
    try {
      pj = json::parse(*perturbed_text);
    } catch (const json::exception&) {
      config_error("perturbed", "is not valid JSON");
    }
  } else if (c.raw.contains("perturbed")) {
    pj = c.raw["perturbed"];
  } else {
    config_error("perturbed", "is required");
  }
  int input = input_flag ? *input_flag : get_field<int>(c.raw, "input", 1);
  if (input < 1 || static_cast<std::size_t>(input) > c.inputs.size()) config_error("input", "index out of range");
  const std::size_t i = static_cast<std::size_t>(input - 1);
  const Dist perturbed = dist_from_json(pj, "perturbed");
  const ModelH model = make_model(c);
  const Sample sample = make_sample(c, model.get());
  double q = 0.0, s = 0.0;
  std::size_t exceed = 0;
  check(fpli_perturbed_quantile(sample.get(), i, perturbed.get(), c.alpha, &q, &exceed), "pli");
  check(fpli_pli(sample.get(), i, perturbed.get(), c.alpha, &s), "pli");
  std::vector<double> ys(fpli_sample_size(sample.get()));
  check(fpli_sample_outputs(sample.get(), ys.data()), "pli");
  double q0 = 0.0;
  check(fpli_empirical_quantile(ys.data(), ys.size(), c.alpha, &q0), "pli");
  ensure_dir(c.output);
  json manifest = manifest_base("pli", c);
  manifest["result"] = {{"input", input},           {"perturbed", spec_json(perturbed.get())},
                        {"pli", jnum(s)},           {"quantile", jnum(q0)},
                        {"perturbed_quantile", jnum(q)}, {"exceed_count", exceed},
                        {"admissible", exceed >= 10}};
  finish_manifest(manifest, c.output, start);
  std::cout << "x" << input << " -> " << describe(perturbed.get()) << ": S = " << num(s) << " (q = " << num(q0)
            << ", q_perturbed = " << num(q) << ", beyond = " << exceed << ")\n";
  return kExitOk;
}

int run_epli(RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const json e = c.raw.contains("epli") ? c.raw["epli"] : json::object();
  const std::string mode_name = get_field<std::string>(e, "mode", "mean_shift");
  fpli_epli_mode mode;
  if (mode_name == "mean_shift") mode = FPLI_EPLI_MEAN_SHIFT;
  else if (mode_name == "variance_scale") mode = FPLI_EPLI_VARIANCE_SCALE;
  else config_error("epli.mode", "expected mean_shift or variance_scale");
  std::vector<double> grid;
  if (!e.contains("grid") || !e["grid"].is_array()) config_error("epli.grid", "is required");
  for (const auto& v : e["grid"]) {
    if (!v.is_number()) config_error("epli.grid", "expected numbers");
    grid.push_back(v.get<double>());
  }
  ensure_dir(c.output);
  json manifest = manifest_base("epli", c);
  const ModelH model = make_model(c);
  const Sample sample = make_sample(c, model.get());
  for (std::size_t i : c.analyse) {
    const std::string tag = "x" + std::to_string(i + 1);
    std::vector<double> s(grid.size());
    std::vector<int> adm(grid.size());
    const fpli_status st = fpli_epli_curve(sample.get(), i, grid.data(), grid.size(), c.alpha, mode, c.mode,
                                           model.get(), c.seed, s.data(), adm.data());
    if (st == FPLI_ERR_UNSUPPORTED) {
      warn(manifest, tag + " skipped: " + fpli_last_error());
      continue;
    }
    check(st, tag);
    const std::string file = "epli_" + tag + ".csv";
    Csv csv(c.output / file);
    csv.raw("input,parameter,pli,admissible");
    for (std::size_t k = 0; k < grid.size(); ++k) csv.row(i + 1, num(grid[k]), num(s[k]), adm[k]);
    manifest["files"].push_back(file);
    double lo = 0, hi = 0;
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::cout << tag << " " << mode_name << ": PLI range [" << num(lo) << ", " << num(hi) << "]\n";
  }
  finish_manifest(manifest, c.output, start);
  return kExitOk;
}

int run_sobol(RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  if (c.model == "external") config_error("model", "Sobol indices need a built-in model to run designs");
  const json sj = c.raw.contains("sobol") ? c.raw["sobol"] : json::object();
  const auto n_base = get_field<std::int64_t>(sj, "n_base", 100000);
  if (n_base < 2) config_error("sobol.n_base", "must be at least 2");
  int has_threshold = 0;
  double threshold = 0.0;
  if (sj.contains("threshold") && !sj["threshold"].is_null()) {
    if (!sj["threshold"].is_number()) config_error("sobol.threshold", "expected a number");
    has_threshold = 1;
    threshold = sj["threshold"].get<double>();
  }
  const ModelH model = make_model(c);
  const auto specs = raw_inputs(c);
  fpli_sobol* raw = nullptr;
  check(fpli_sobol_compute(model.get(), specs.data(), specs.size(), static_cast<std::size_t>(n_base), c.seed,
                           has_threshold, threshold, c.alpha, &raw),
        "sobol");
  const Sobol res(raw);
  ensure_dir(c.output);
  json manifest = manifest_base("sobol", c);
  for (std::size_t k = 0; k < fpli_sobol_warning_count(raw); ++k) warn(manifest, fpli_sobol_warning(raw, k));
  Csv csv(c.output / "sobol.csv");
  csv.raw("input,first_order,total,target_first_order,target_total,se_first_order,se_total,se_target_first_order,"
          "se_target_total");
  for (std::size_t i = 0; i < fpli_sobol_dimension(raw); ++i) {
    fpli_sobol_index x;
    check(fpli_sobol_get(raw, i, &x), "sobol");
    csv.row(i + 1, num(x.first_order), num(x.total), num(x.target_first_order), num(x.target_total),
            num(x.se_first_order), num(x.se_total), num(x.se_target_first_order), num(x.se_target_total));
    std::cout << "x" << i + 1 << ": S = " << num(x.first_order) << ", T = " << num(x.total)
              << ", target S = " << num(x.target_first_order) << ", target T = " << num(x.target_total) << '\n';
  }
  manifest["threshold"] = jnum(fpli_sobol_threshold(raw));
  manifest["files"].push_back("sobol.csv");
  finish_manifest(manifest, c.output, start);
  return kExitOk;
}

json demo_config(const std::string& name) {
  json grid = json::array();
  if (name == "ishigami") {
    for (double d : {0.1, 0.3, 0.5, 0.7, 0.9}) grid.push_back(d);
    return {{"model", "ishigami"}, {"n", 2000},     {"alpha", 0.95},  {"delta_grid", grid},
            {"K", 100},            {"n_steps", 1000}, {"integrator", "adams_moulton"}, {"B", 50},
            {"mode", "resample"},  {"output", "demo_ishigami"}};
  }
  if (name == "flood") {
    for (int k = 1; k <= 14; ++k) grid.push_back(k / 10.0);
    return {{"model", "flood"}, {"n", 2000},      {"alpha", 0.95},  {"delta_grid", grid},
            {"K", 100},         {"n_steps", 1000}, {"integrator", "adams_moulton"}, {"B", 50},
            {"mode", "reverse_is"}, {"output", "demo_flood"}};
  }
  config_error("demo", "expected ishigami or flood, got '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbed-law robustness indices on Fisher spheres", "fisherpli"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("fisherpli ") + fpli_version());

  unsigned threads = 0;
  std::optional<std::string> seed;
  std::optional<std::string> out;
  std::string config_path;
  app.add_option("--threads", threads, "worker threads (default: available parallelism)");

  QuickArgs quick;
  auto add_quick = [&](CLI::App* sub, bool sphere_opts) {
    sub->add_option("--family", quick.family, "distribution family");
    sub->add_option("--theta", quick.theta, "parameters, comma separated");
    sub->add_option("--support", quick.support, "support bounds lo,hi (inf allowed)");
    if (sphere_opts) {
      sub->add_option("--delta", quick.delta, "Fisher radius");
      sub->add_option("--k", quick.k, "number of sphere directions");
      sub->add_option("--steps", quick.steps, "integration steps");
      sub->add_option("--method", quick.method, "adams_moulton or euler");
    }
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed");
  };

  auto* fim = app.add_subcommand("fim", "Fisher information matrix of a distribution");
  add_quick(fim, false);
  fim->add_option("--out", out, "output directory");
  auto* geo = app.add_subcommand("geodesic", "integrate one geodesic from a distribution");
  add_quick(geo, true);
  geo->add_option("--direction", quick.direction, "sphere direction index for the initial momentum");
  geo->add_option("--momentum", quick.momentum, "explicit initial momentum, comma separated");
  geo->add_option("--out", out, "output directory");
  auto* sph = app.add_subcommand("sphere", "Fisher sphere around a distribution");
  add_quick(sph, true);
  sph->add_option("--chart", quick.chart, "natural or normal_variance");
  sph->add_option("--out", out, "output directory");

  Overrides ov;
  std::string deltas;
  std::optional<int> k_override, steps_override, b_override, input_flag;
  std::optional<std::size_t> n_override;
  std::optional<std::string> perturbed;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    add_common(sub);
    sub->add_option("--k", k_override, "override K");
    sub->add_option("--steps", steps_override, "override n_steps");
    sub->add_option("--bootstrap", b_override, "override B");
    sub->add_option("--deltas", deltas, "override the delta grid, comma separated");
    sub->add_option("--n", n_override, "override the generated sample size");
  };
  auto* pli = app.add_subcommand("pli", "perturbed-law index for one perturbed input law");
  add_config(pli);
  pli->add_option("--perturbed", perturbed, "perturbed law as JSON");
  pli->add_option("--input", input_flag, "1-based input index");
  auto* ofpli = app.add_subcommand("ofpli", "S+ and S- over Fisher spheres for each input");
  add_config(ofpli);
  auto* epli = app.add_subcommand("epli", "standard-space mean or variance perturbation indices");
  add_config(epli);
  auto* sobol = app.add_subcommand("sobol", "pick-freeze and target Sobol indices");
  add_config(sobol);
  auto* demo = app.add_subcommand("demo", "built-in ishigami or flood OF-PLI run");
  std::string demo_name;
  demo->add_option("name", demo_name, "ishigami or flood")->required();
  add_common(demo);
  demo->add_option("--k", k_override, "override K");
  demo->add_option("--steps", steps_override, "override n_steps");
  demo->add_option("--bootstrap", b_override, "override B");
  demo->add_option("--deltas", deltas, "override the delta grid, comma separated");
  demo->add_option("--n", n_override, "override the sample size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    fpli_set_threads(threads);
    const fs::path out_dir = out ? fs::path(*out) : fs::path(".");
    if (fim->parsed()) return cmd_fim(quick, out ? std::optional<fs::path>(*out) : std::nullopt);
    if (geo->parsed()) return cmd_geodesic(quick, out_dir);
    if (sph->parsed()) return cmd_sphere(quick, out_dir);

    ov.seed = seed;
    if (out) ov.out = fs::path(*out);
    ov.k = k_override;
    ov.steps = steps_override;
    ov.bootstrap = b_override;
    ov.deltas = deltas;
    ov.n = n_override;
    json j;
    std::string command;
    if (demo->parsed()) {
      if (!seed) config_error("seed", "is required (pass --seed)");
      j = demo_config(demo_name);
      command = "demo " + demo_name;
    } else {
      j = load_json_file(config_path);
      // A relative sample path is relative to the config file.
      if (j.is_object() && j.contains("sample") && j["sample"].is_string()) {
        const fs::path p = j["sample"].get<std::string>();
        if (p.is_relative()) j["sample"] = (fs::path(config_path).parent_path() / p).lexically_normal().string();
      }
      command = pli->parsed() ? "pli" : ofpli->parsed() ? "ofpli" : epli->parsed() ? "epli" : "sobol";
    }
    if (j.is_object()) apply_overrides(j, ov);
    const bool need_grid = ofpli->parsed() || demo->parsed();
    RunConfig c = parse_config(j, need_grid);
    if (pli->parsed()) return run_pli(c, perturbed, input_flag);
    if (epli->parsed()) return run_epli(c);
    if (sobol->parsed()) return run_sobol(c);
    return run_ofpli(command, c);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

#include "fisherpli/serialization.hpp"

#include <cmath>
#include <limits>

#include "fisherpli/error.hpp"

namespace fisherpli {

namespace {

nlohmann::json bound_to_json(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json spec_to_json(const DistributionSpec& spec) {
  nlohmann::json theta = nlohmann::json::array();
  for (int k = 0; k < spec.dimension(); ++k) theta.push_back(spec.theta()[k]);
  return {{"family", std::string(family_name(spec.family()))},
          {"theta", theta},
          {"support", {bound_to_json(spec.support().lo), bound_to_json(spec.support().hi)}}};
}

DistributionSpec spec_from_json(const nlohmann::json& j, const std::string& field) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!j.is_object()) throw ConfigError(field, "expected an object with family, theta and support");
  if (!j.contains("family") || !j["family"].is_string()) throw ConfigError(field + ".family", "missing or not a string");
  FamilyTag family;
  try {
    family = family_from_name(j["family"].get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(field + ".family", e.what());
  }
  ParamVector theta(0);
  if (j.contains("theta")) {
    const auto& t = j["theta"];
    if (!t.is_array() || t.size() > 2) throw ConfigError(field + ".theta", "expected an array of at most 2 numbers");
    theta.resize(static_cast<Eigen::Index>(t.size()));
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!t[k].is_number()) throw ConfigError(field + ".theta", "expected numbers");
      theta[static_cast<Eigen::Index>(k)] = t[k].get<double>();
    }
  }
  if (theta.size() != parameter_count(family))
    throw ConfigError(field + ".theta", std::string(family_name(family)) + " takes " +
                                            std::to_string(parameter_count(family)) + " parameter(s)");
  Support support;
  if (j.contains("support")) {
    const auto& s = j["support"];
    if (!s.is_array() || s.size() != 2) throw ConfigError(field + ".support", "expected [lo, hi]");
    for (int k = 0; k < 2; ++k)
      if (!s[k].is_null() && !s[k].is_number()) throw ConfigError(field + ".support", "bounds must be numbers or null");
    support.lo = s[0].is_null() ? -inf : s[0].get<double>();
    support.hi = s[1].is_null() ? inf : s[1].get<double>();
  }
  try {
    return DistributionSpec(family, theta, support);
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

std::vector<DistributionSpec> specs_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty array of distributions");
  std::vector<DistributionSpec> out;
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(spec_from_json(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

}  // namespace fisherpli

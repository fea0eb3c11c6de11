#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fisherpli/distributions.hpp"

namespace fisherpli {

/// {"family": "trunc_normal", "theta": [30, 7.5], "support": [15, 75]};
/// infinite bounds are written as null.
nlohmann::json spec_to_json(const DistributionSpec& spec);

/// Throws ConfigError naming `field` (e.g. "inputs[2].theta") on a missing
/// key, a wrong type or an invalid parameter.
DistributionSpec spec_from_json(const nlohmann::json& j, const std::string& field = "input");

std::vector<DistributionSpec> specs_from_json(const nlohmann::json& j, const std::string& field = "inputs");

}  // namespace fisherpli

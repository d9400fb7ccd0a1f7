#pragma once

// Short command-line forms for library objects. Each parser also accepts the
// full JSON form when given a JSON value instead of a string.
//
//   scheme  uniform | kernel:<name> | self_normalized[:<theta>] |
//           mixed_sign_thirds | perturbed_uniform:<eps>
//   theta   uniform:<lo>:<hi> | degenerate:<c>
//   model   weibull:<r> | weibull:<r>:stretched_lower:<alpha>[:<t_star>] |
//           shifted_weibull:<r>:<offset>
//   law     bernoulli:<p> | normal:<mu>:<sigma> | poisson:<lambda> |
//           empirical:<v1>:<v2>:...
// Hyphens in tags are read as underscores.

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldptails/rate_functions.hpp"
#include "ldptails/tail_models.hpp"
#include "ldptails/weight_schemes.hpp"

namespace ldptails::cli {

WeightScheme parse_scheme(const nlohmann::json& value);
ThetaDistribution parse_theta(const std::string& text);
TailModel parse_model(const nlohmann::json& value);
LightTailedSpec parse_law(const nlohmann::json& value);

/// "a,b,c" or a JSON array.
std::vector<double> parse_doubles(const nlohmann::json& value);
std::vector<std::size_t> parse_sizes(const nlohmann::json& value);

/// Whole-string number conversion; throws FormatError on trailing junk.
double to_double(const std::string& text);
std::uint64_t to_u64(const std::string& text);

}  // namespace ldptails::cli

#include "ldptails_cli/parse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>

#include "ldptails/errors.hpp"

namespace ldptails::cli {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string normalize_tag(std::string tag) {
  std::replace(tag.begin(), tag.end(), '-', '_');
  std::transform(tag.begin(), tag.end(), tag.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tag;
}

void expect_arity(const std::vector<std::string>& parts, std::size_t lo, std::size_t hi,
                  const std::string& text) {
  if (parts.size() < lo || parts.size() > hi) throw FormatError("malformed tag '" + text + "'");
}

}  // namespace

double to_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    if (text == "inf" || text == "infinity") return kInfinity;
    throw FormatError("not a number: '" + text + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw FormatError("not an unsigned 64-bit integer: '" + text + "'");
  }
  return v;
}

ThetaDistribution parse_theta(const std::string& text) {
  const auto parts = split(text, ':');
  const auto law = normalize_tag(parts[0]);
  if (law == "uniform") {
    expect_arity(parts, 1, 3, text);
    if (parts.size() == 1) return ThetaDistribution(ThetaUniform{0.0, 1.0});
    expect_arity(parts, 3, 3, text);
    return ThetaDistribution(ThetaUniform{to_double(parts[1]), to_double(parts[2])});
  }
  if (law == "degenerate") {
    expect_arity(parts, 2, 2, text);
    return ThetaDistribution(ThetaDegenerate{to_double(parts[1])});
  }
  if (law == "exponential" || law == "gamma" || law == "pareto" || law == "lognormal") {
    throw DomainError("theta law '" + law + "' is unbounded; M* must be finite");
  }
  throw FormatError("unknown theta law '" + parts[0] + "'");
}

WeightScheme parse_scheme(const nlohmann::json& value) {
  if (!value.is_string()) return weight_scheme_from_json(value);
  const auto text = value.get<std::string>();
  const auto colon = text.find(':');
  const auto head = normalize_tag(text.substr(0, colon));
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "uniform" && rest.empty()) return WeightScheme(UniformWeights{});
  if (head == "kernel") return WeightScheme(KernelWeights{kernel_from_name(normalize_tag(rest))});
  if (head == "epanechnikov" || head == "triangular" || head == "quartic") {
    return WeightScheme(KernelWeights{kernel_from_name(head)});
  }
  if (head == "self_normalized" || head == "random") {
    auto theta = rest.empty() ? ThetaDistribution(ThetaUniform{0.0, 1.0}) : parse_theta(rest);
    return WeightScheme(SelfNormalizedRandom{theta, 1});
  }
  if (head == "mixed_sign_thirds" || head == "mixed_sign") return WeightScheme(MixedSignThirds{});
  if (head == "perturbed_uniform" || head == "perturbed") {
    return WeightScheme(PerturbedUniform{rest.empty() ? 0.25 : to_double(rest)});
  }
  throw FormatError("unknown weight scheme '" + text + "'");
}

TailModel parse_model(const nlohmann::json& value) {
  if (!value.is_string()) return tail_model_from_json(value);
  const auto text = value.get<std::string>();
  const auto parts = split(text, ':');
  const auto head = normalize_tag(parts[0]);
  if (head == "weibull" || head == "exact_weibull") {
    expect_arity(parts, 2, 5, text);
    const double r = to_double(parts[1]);
    if (parts.size() == 2) return TailModel::exact_weibull(r);
    if (normalize_tag(parts[2]) != "stretched_lower" || parts.size() < 4) {
      throw FormatError("malformed model '" + text + "'");
    }
    const double t_star = parts.size() == 5 ? to_double(parts[4]) : 1.0;
    return TailModel::exact_weibull(r, StretchedLower{to_double(parts[3])}, t_star);
  }
  if (head == "shifted_weibull" || head == "shifted_exact_weibull") {
    expect_arity(parts, 3, 3, text);
    return TailModel::shifted_exact_weibull(to_double(parts[1]), to_double(parts[2]));
  }
  throw FormatError("unknown tail model '" + text + "'");
}

LightTailedSpec parse_law(const nlohmann::json& value) {
  if (!value.is_string()) {
    try {
      const auto law = normalize_tag(value.at("law").get<std::string>());
      const auto s_nu = value.value("s_nu", std::vector<double>{});
      if (law == "bernoulli") return LightTailedSpec(Bernoulli{value.at("p").get<double>()}, s_nu);
      if (law == "normal") {
        return LightTailedSpec(Normal{value.value("mu", 0.0), value.value("sigma", 1.0)}, s_nu);
      }
      if (law == "poisson") return LightTailedSpec(Poisson{value.at("lambda").get<double>()}, s_nu);
      if (law == "empirical") {
        return LightTailedSpec(Empirical{value.at("points").get<std::vector<double>>()}, s_nu);
      }
      throw FormatError("unknown law '" + law + "'");
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("law: ") + e.what());
    }
  }
  const auto text = value.get<std::string>();
  const auto parts = split(text, ':');
  const auto head = normalize_tag(parts[0]);
  if (head == "bernoulli") {
    expect_arity(parts, 2, 2, text);
    return LightTailedSpec(Bernoulli{to_double(parts[1])});
  }
  if (head == "normal") {
    expect_arity(parts, 1, 3, text);
    if (parts.size() == 1) return LightTailedSpec(Normal{});
    expect_arity(parts, 3, 3, text);
    return LightTailedSpec(Normal{to_double(parts[1]), to_double(parts[2])});
  }
  if (head == "poisson") {
    expect_arity(parts, 2, 2, text);
    return LightTailedSpec(Poisson{to_double(parts[1])});
  }
  if (head == "empirical") {
    std::vector<double> pts;
    for (std::size_t i = 1; i < parts.size(); ++i) pts.push_back(to_double(parts[i]));
    return LightTailedSpec(Empirical{pts});
  }
  throw FormatError("unknown law '" + text + "'");
}

std::vector<double> parse_doubles(const nlohmann::json& value) {
  if (value.is_number()) return {value.get<double>()};
  if (value.is_array()) {
    std::vector<double> out;
    for (const auto& v : value) {
      if (!v.is_number()) throw FormatError("expected a list of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  if (!value.is_string()) throw FormatError("expected a list of numbers");
  std::vector<double> out;
  for (const auto& p : split(value.get<std::string>(), ',')) out.push_back(to_double(p));
  return out;
}

std::vector<std::size_t> parse_sizes(const nlohmann::json& value) {
  const auto is_count = [](const nlohmann::json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  };
  if (is_count(value)) return {value.get<std::size_t>()};
  if (value.is_array()) {
    std::vector<std::size_t> out;
    for (const auto& v : value) {
      if (!is_count(v)) throw FormatError("expected a list of positive integers");
      out.push_back(v.get<std::size_t>());
    }
    return out;
  }
  if (!value.is_string()) throw FormatError("expected a list of positive integers");
  std::vector<std::size_t> out;
  for (const auto& p : split(value.get<std::string>(), ',')) out.push_back(to_u64(p));
  return out;
}

}  // namespace ldptails::cli

#include "ldptails/svf.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "ldptails/errors.hpp"

namespace ldptails::svf {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite(double v) { return std::isfinite(v); }

void validate_karamata(const Karamata& k) {
  if (!(k.anchor > 0.0) || !finite(k.anchor)) {
    throw DomainError("karamata: anchor must be positive and finite");
  }
  if (!finite(k.eta_limit)) throw DomainError("karamata: eta_limit must be finite");
  if (!(k.eps_max >= 0.0) || !(k.tail_tol >= 0.0) || !(k.horizon > 0.0) ||
      !finite(k.eps_max) || !finite(k.horizon)) {
    throw DomainError("karamata: eps_max, tail_tol must be >= 0 and horizon > 0");
  }
  const auto& table = k.eps_table;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& bp = table[i];
    if (!(bp.at > 0.0) || !finite(bp.at) || !finite(bp.value)) {
      throw DomainError("karamata: breakpoints must be positive and finite");
    }
    if (i > 0 && !(bp.at > table[i - 1].at)) {
      throw DomainError("karamata: breakpoints must be strictly increasing");
    }
    if (std::abs(bp.value) > k.eps_max) {
      std::ostringstream msg;
      msg << "karamata: |eps| = " << std::abs(bp.value) << " at u = " << bp.at
          << " exceeds eps_max = " << k.eps_max;
      throw InvariantViolation(msg.str());
    }
    const bool reaches_tail = i + 1 == table.size() || table[i + 1].at > k.horizon;
    if (reaches_tail && std::abs(bp.value) > k.tail_tol) {
      std::ostringstream msg;
      msg << "karamata: eps does not vanish past the horizon (|eps| = "
          << std::abs(bp.value) << " on the segment starting at u = " << bp.at
          << ", tail_tol = " << k.tail_tol << ")";
      throw InvariantViolation(msg.str());
    }
  }
}

double karamata_value(const Karamata& k, double t) {
  double integral = 0.0;
  if (t > k.anchor) {
    const auto& table = k.eps_table;
    for (std::size_t i = 0; i < table.size(); ++i) {
      const double next = i + 1 < table.size() ? table[i + 1].at : INFINITY;
      const double lo = std::max(table[i].at, k.anchor);
      const double hi = std::min(next, t);
      if (hi > lo) integral += table[i].value * (std::log(hi) - std::log(lo));
    }
  }
  return std::exp(k.eta_limit + integral);
}

void require_child(const SpecPtr& p) {
  if (!p) throw DomainError("derived slowly varying spec has an empty operand");
}

}  // namespace

SlowlyVaryingSpec::SlowlyVaryingSpec(Family family, double domain_floor)
    : family_(std::move(family)), domain_floor_(domain_floor) {
  if (!(domain_floor_ > 0.0) || !finite(domain_floor_)) {
    throw DomainError("slowly varying spec: domain_floor must be positive");
  }
  std::visit(Overloaded{
                 [](const Constant& c) {
                   if (!(c.value > 0.0) || !finite(c.value)) {
                     throw DomainError("constant: value must be positive and finite");
                   }
                 },
                 [](const PowerOfLog& p) {
                   if (!finite(p.power)) throw DomainError("power_of_log: power must be finite");
                   if (!(p.shift >= 1.0) || !finite(p.shift)) {
                     throw DomainError("power_of_log: shift must be >= 1");
                   }
                 },
                 [](const IteratedLog& p) {
                   if (!finite(p.power)) throw DomainError("iterated_log: power must be finite");
                 },
                 [](const Karamata& k) { validate_karamata(k); },
                 [](const Product& p) {
                   require_child(p.lhs);
                   require_child(p.rhs);
                 },
                 [](const Sum& s) {
                   require_child(s.lhs);
                   require_child(s.rhs);
                 },
                 [](const Power& p) {
                   require_child(p.base);
                   if (!finite(p.exponent)) throw DomainError("power: exponent must be finite");
                 },
             },
             family_);
}

SlowlyVaryingSpec SlowlyVaryingSpec::constant(double value) {
  return SlowlyVaryingSpec(Constant{value});
}
SlowlyVaryingSpec SlowlyVaryingSpec::power_of_log(double power, double shift) {
  return SlowlyVaryingSpec(PowerOfLog{power, shift});
}
SlowlyVaryingSpec SlowlyVaryingSpec::iterated_log(double power) {
  return SlowlyVaryingSpec(IteratedLog{power});
}
SlowlyVaryingSpec SlowlyVaryingSpec::karamata(Karamata params) {
  return SlowlyVaryingSpec(std::move(params));
}
SlowlyVaryingSpec SlowlyVaryingSpec::product(SlowlyVaryingSpec lhs, SlowlyVaryingSpec rhs) {
  return SlowlyVaryingSpec(Product{std::make_shared<const SlowlyVaryingSpec>(std::move(lhs)),
                                   std::make_shared<const SlowlyVaryingSpec>(std::move(rhs))});
}
SlowlyVaryingSpec SlowlyVaryingSpec::sum(SlowlyVaryingSpec lhs, SlowlyVaryingSpec rhs) {
  return SlowlyVaryingSpec(Sum{std::make_shared<const SlowlyVaryingSpec>(std::move(lhs)),
                               std::make_shared<const SlowlyVaryingSpec>(std::move(rhs))});
}
SlowlyVaryingSpec SlowlyVaryingSpec::power(SlowlyVaryingSpec base, double exponent) {
  return SlowlyVaryingSpec(
      Power{std::make_shared<const SlowlyVaryingSpec>(std::move(base)), exponent});
}

bool SlowlyVaryingSpec::is_constant() const noexcept {
  return std::holds_alternative<Constant>(family_);
}

double SlowlyVaryingSpec::evaluate_unclamped(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.value; },
          [t](const PowerOfLog& p) { return std::pow(std::log(p.shift + t), p.power); },
          [t](const IteratedLog& p) {
            constexpr double e2 = std::numbers::e * std::numbers::e;
            return std::pow(std::log(std::log(e2 + t)), p.power);
          },
          [t](const Karamata& k) { return karamata_value(k, t); },
          [t](const Product& p) { return (*p.lhs)(t) * (*p.rhs)(t); },
          [t](const Sum& s) { return (*s.lhs)(t) + (*s.rhs)(t); },
          [t](const Power& p) { return std::pow((*p.base)(t), p.exponent); },
      },
      family_);
}

double SlowlyVaryingSpec::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("slowly varying function evaluated at t <= 0");
  return evaluate_unclamped(std::max(t, domain_floor_));
}

bool operator==(const SlowlyVaryingSpec& a, const SlowlyVaryingSpec& b) {
  nlohmann::json ja;
  nlohmann::json jb;
  to_json(ja, a);
  to_json(jb, b);
  return ja == jb;
}

double evaluate(const SlowlyVaryingSpec& spec, double t) { return spec(t); }

double slow_variation_deviation(const SlowlyVaryingSpec& spec, double a, double t) {
  if (!(a > 0.0)) throw DomainError("slow_variation_deviation: scale a must be positive");
  return std::abs(spec(a * t) / spec(t) - 1.0);
}

double ratio_with_scaling(const SlowlyVaryingSpec& spec, double g_limit,
                          const std::function<double(double)>& g, double t) {
  if (!(g_limit > 0.0) || !finite(g_limit)) {
    throw DomainError("ratio_with_scaling: g_limit must lie in (0, inf)");
  }
  const double scale = g(t);
  if (!(scale > 0.0) || !finite(scale)) {
    throw DomainError("ratio_with_scaling: g(t) must be positive");
  }
  return spec(scale * t) / spec(t);
}

double composition_deviation(const SlowlyVaryingSpec& outer, const SlowlyVaryingSpec& inner,
                             double a, double t) {
  if (!(a > 0.0)) throw DomainError("composition_deviation: scale a must be positive");
  return std::abs(outer(inner(a * t)) / outer(inner(t)) - 1.0);
}

double log_growth_ratio(const SlowlyVaryingSpec& spec, double t) {
  if (!(t > 1.0)) throw DomainError("log_growth_ratio: requires t > 1");
  return std::abs(std::log(spec(t))) / std::log(t);
}

bool potter_monotone(const SlowlyVaryingSpec& spec, double alpha, std::span<const double> grid) {
  if (!(alpha > 0.0)) throw DomainError("potter_monotone: alpha must be positive");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double dlog_l = std::log(spec(grid[k])) - std::log(spec(grid[k - 1]));
    const double dlog_t = std::log(grid[k]) - std::log(grid[k - 1]);
    if (!(dlog_t > 0.0)) throw DomainError("potter_monotone: grid must be increasing");
    if (!(alpha * dlog_t + dlog_l > 0.0) || !(dlog_l - alpha * dlog_t < 0.0)) return false;
  }
  return true;
}

std::vector<SlowlyVaryingSpec> catalogue() {
  using S = SlowlyVaryingSpec;
  const double e3 = std::exp(3.0);
  const double e5 = std::exp(5.0);
  return {
      S::constant(1.0),
      S::constant(2.0),
      S::power_of_log(0.25, 1.0),
      S::power_of_log(-0.25, 1.0),
      S::power_of_log(0.25, 10.0),
      S::iterated_log(0.5),
      S::iterated_log(-0.5),
      S::karamata(Karamata{.anchor = 1.0,
                           .eta_limit = 0.2,
                           .eps_table = {{1.0, 0.08}, {e3, -0.05}, {e5, 0.0}},
                           .eps_max = 0.08,
                           .horizon = e5,
                           .tail_tol = 0.0}),
  };
}

void to_json(nlohmann::json& j, const SlowlyVaryingSpec& spec) {
  std::visit(Overloaded{
                 [&](const Constant& c) { j = {{"family", "constant"}, {"value", c.value}}; },
                 [&](const PowerOfLog& p) {
                   j = {{"family", "power_of_log"}, {"power", p.power}, {"shift", p.shift}};
                 },
                 [&](const IteratedLog& p) {
                   j = {{"family", "iterated_log"}, {"power", p.power}};
                 },
                 [&](const Karamata& k) {
                   auto table = nlohmann::json::array();
                   for (const auto& bp : k.eps_table) table.push_back({bp.at, bp.value});
                   j = {{"family", "karamata"}, {"anchor", k.anchor},
                        {"eta_limit", k.eta_limit}, {"eps_table", table},
                        {"eps_max", k.eps_max}, {"horizon", k.horizon},
                        {"tail_tol", k.tail_tol}};
                 },
                 [&](const Product& p) {
                   j = {{"family", "product"}, {"lhs", *p.lhs}, {"rhs", *p.rhs}};
                 },
                 [&](const Sum& s) {
                   j = {{"family", "sum"}, {"lhs", *s.lhs}, {"rhs", *s.rhs}};
                 },
                 [&](const Power& p) {
                   j = {{"family", "power"}, {"base", *p.base}, {"exponent", p.exponent}};
                 },
             },
             spec.family());
  j["domain_floor"] = spec.domain_floor();
}

SlowlyVaryingSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw FormatError("slowly varying spec: expected an object with a 'family' tag");
  }
  const std::string tag = j.at("family").get<std::string>();
  const double floor = j.value("domain_floor", SlowlyVaryingSpec::kDefaultFloor);
  auto child = [&](const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("slowly varying spec: missing '") + key + "'");
    return std::make_shared<const SlowlyVaryingSpec>(spec_from_json(j.at(key)));
  };
  try {
    if (tag == "constant") {
      return SlowlyVaryingSpec(Constant{j.at("value").get<double>()}, floor);
    }
    if (tag == "power_of_log") {
      return SlowlyVaryingSpec(PowerOfLog{j.at("power").get<double>(), j.value("shift", 1.0)},
                               floor);
    }
    if (tag == "iterated_log") {
      return SlowlyVaryingSpec(IteratedLog{j.at("power").get<double>()}, floor);
    }
    if (tag == "karamata") {
      Karamata k;
      k.anchor = j.at("anchor").get<double>();
      k.eta_limit = j.value("eta_limit", 0.0);
      for (const auto& pair : j.at("eps_table")) {
        k.eps_table.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
      }
      k.eps_max = j.value("eps_max", 1.0);
      k.horizon = j.value("horizon", k.eps_table.empty() ? k.anchor : k.eps_table.back().at);
      k.tail_tol = j.value("tail_tol", 0.0);
      return SlowlyVaryingSpec(std::move(k), floor);
    }
    if (tag == "product") return SlowlyVaryingSpec(Product{child("lhs"), child("rhs")}, floor);
    if (tag == "sum") return SlowlyVaryingSpec(Sum{child("lhs"), child("rhs")}, floor);
    if (tag == "power") {
      return SlowlyVaryingSpec(Power{child("base"), j.at("exponent").get<double>()}, floor);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("slowly varying spec '") + tag + "': " + e.what());
  }
  throw FormatError("slowly varying spec: unknown family '" + tag + "'");
}

std::string to_text(const SlowlyVaryingSpec& spec) {
  nlohmann::json j = spec;
  return j.dump();
}

SlowlyVaryingSpec from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("slowly varying spec: ") + e.what());
  }
  return spec_from_json(j);
}

}  // namespace ldptails::svf

#include "ldptails_cli/app.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ldptails/csv.hpp"
#include "ldptails/errors.hpp"
#include "ldptails/rare_event_mc.hpp"
#include "ldptails/rate_functions.hpp"
#include "ldptails/weight_schemes.hpp"
#include "ldptails_cli/parse.hpp"
#include "ldptails_cli/selftest.hpp"

namespace ldptails::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";
constexpr const char* kSeedEnv = "LDP_TAILS_SEED";

struct Flag {
  CLI::Option* opt = nullptr;
  std::string value;
};

Flag& add_flag(CLI::App* app, std::map<std::string, Flag>& flags, const std::string& name,
               const std::string& help) {
  auto& f = flags[name];
  f.opt = app->add_option("--" + name, f.value, help);
  return f;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("config '" + path + "': " + e.what());
  }
}

// Flag value when given, else the config entry, else nothing. Flags win.
class Settings {
 public:
  Settings(const std::map<std::string, Flag>& flags, json config)
      : flags_(flags), config_(std::move(config)) {}

  std::optional<json> get(const std::string& name) const {
    auto it = flags_.find(name);
    if (it != flags_.end() && it->second.opt->count() > 0) return std::optional<json>(std::in_place, it->second.value);
    const std::string key = config_key(name);
    if (config_.is_object() && config_.contains(key)) return std::optional<json>(std::in_place, config_.at(key));
    return std::nullopt;
  }

  bool has(const std::string& name) const { return get(name).has_value(); }

  std::string text(const std::string& name, const std::string& fallback) const {
    auto v = get(name);
    if (!v) return fallback;
    if (!v->is_string()) throw FormatError("--" + name + " must be a string");
    return v->get<std::string>();
  }

  double number(const std::string& name, double fallback) const {
    auto v = get(name);
    if (!v) return fallback;
    if (v->is_string()) return to_double(v->get<std::string>());
    if (!v->is_number()) throw FormatError("--" + name + " must be a number");
    return v->get<double>();
  }

  std::uint64_t unsigned_number(const std::string& name, std::uint64_t fallback) const {
    auto v = get(name);
    if (!v) return fallback;
    if (v->is_string()) return to_u64(v->get<std::string>());
    if (!v->is_number_unsigned()) throw FormatError("--" + name + " must be a nonnegative integer");
    return v->get<std::uint64_t>();
  }

  const json& config() const { return config_; }

 private:
  static std::string config_key(std::string name) {
    std::replace(name.begin(), name.end(), '-', '_');
    return name;
  }

  const std::map<std::string, Flag>& flags_;
  json config_;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
};

json load_config(const std::map<std::string, Flag>& flags) {
  const auto& f = flags.at("config");
  if (f.opt->count() == 0) return json::object();
  return read_json_file(f.value);
}

std::uint64_t resolve_seed(const Settings& s, std::uint64_t fallback = 1) {
  if (s.has("seed")) return s.unsigned_number("seed", fallback);
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') return to_u64(env);
  return fallback;
}

fs::path prepare_out(const Settings& s) {
  const fs::path dir = s.text("out", ".");
  fs::create_directories(dir);
  return dir;
}

void check_format(const Settings& s) {
  const auto f = s.text("format", "csv");
  if (f != "csv") throw FormatError("unsupported --format '" + f + "' (only csv)");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write '" + path.string() + "'");
  return f;
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------- validate-weights

int cmd_validate_weights(const Settings& s, Context& ctx) {
  check_format(s);
  const auto scheme_value = s.get("scheme");
  if (!scheme_value) throw FormatError("validate-weights: --scheme is required");
  WeightScheme scheme = parse_scheme(*scheme_value);
  if (s.has("theta") && scheme.is_self_normalized()) {
    scheme = WeightScheme(SelfNormalizedRandom{parse_theta(s.text("theta", "")), 1});
  }
  if (scheme.is_self_normalized()) scheme = scheme.with_theta_seed(resolve_seed(s));
  const auto assumption = s.text("assumption", "B");
  if (assumption != "A" && assumption != "B") throw FormatError("--assumption must be A or B");
  const auto grid = s.has("n-grid") ? parse_sizes(*s.get("n-grid"))
                                    : std::vector<std::size_t>{625, 1250, 2500, 5000, 10000};
  const double tol = s.number("tol", 1e-2);
  const auto nu_max = static_cast<int>(s.unsigned_number("nu-max", 5));

  const auto report = assumption == "A" ? assumption_a_report(scheme, nu_max, grid, tol)
                                        : assumption_b_report(scheme, grid, tol);
  const auto dir = prepare_out(s);
  {
    auto f = open_out(dir / "assumption_b.csv");
    write_b_csv(report, f);
  }
  if (assumption == "A") {
    auto f = open_out(dir / "assumption_a.csv");
    write_a_csv(report, f);
  }
  json summary = {{"scheme", scheme},
                  {"assumption", assumption},
                  {"tol", tol},
                  {"n_grid", report.n_grid},
                  {"s1", report.s1_estimate},
                  {"s", report.s_estimate},
                  {"b_pass", report.b_pass},
                  {"diagnostics", report.diagnostics}};
  if (assumption == "A") {
    summary["s_nu"] = report.s_nu;
    summary["growth_exponent"] = report.growth_exponent;
    summary["r_nu_envelope"] = report.r_nu_envelope;
    summary["envelope_flag"] = report.envelope_flag;
    summary["a1_pass"] = report.a1_pass;
    summary["a2_pass"] = report.a2_pass;
  }
  {
    auto f = open_out(dir / "assumption_report.json");
    f << summary.dump(2) << "\n";
  }

  ctx.out << "scheme=" << scheme.tag() << "\n";
  ctx.out << "s1=" << format_number(report.s1_estimate) << "\n";
  ctx.out << "s=" << format_number(report.s_estimate) << "\n";
  ctx.out << "b_pass=" << yes_no(report.b_pass) << "\n";
  bool pass = report.b_pass;
  if (assumption == "A") {
    ctx.out << "a1_pass=" << yes_no(report.a1_pass) << "\n";
    ctx.out << "a2_pass=" << yes_no(report.a2_pass) << "\n";
    pass = report.a1_pass && report.a2_pass;
  }
  for (const auto& d : report.diagnostics) ctx.out << "note: " << d << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- rate

std::vector<double> resolve_x(const Settings& s) {
  if (s.has("x")) return parse_doubles(*s.get("x"));
  if (s.has("x-grid")) {
    const auto spec = s.text("x-grid", "");
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(to_double(item));
    if (parts.size() != 3 || parts[2] < 1.0) throw FormatError("--x-grid must be lo:hi:count");
    const auto count = static_cast<std::size_t>(parts[2]);
    std::vector<double> xs;
    for (std::size_t i = 0; i < count; ++i) {
      xs.push_back(count == 1 ? parts[0]
                              : parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) /
                                               static_cast<double>(count - 1));
    }
    return xs;
  }
  throw FormatError("rate: --x or --x-grid is required");
}

RateFormula build_formula(const std::string& tag, const Settings& s) {
  const double m = s.number("m", 0.0);
  const double r = s.number("r", 0.5);
  if (tag == "stretched") return StretchedFormula{m, s.number("s", 1.0), s.number("s1", 1.0), r};
  if (tag == "iid") return IidFormula{m, r};
  if (tag == "random_weight" || tag == "random-weight") {
    double e_theta = 0.0;
    double m_star = 0.0;
    if (s.has("theta")) {
      const auto theta = parse_theta(s.text("theta", ""));
      e_theta = theta.mean();
      m_star = theta.ess_sup();
    }
    e_theta = s.number("e-theta", e_theta);
    m_star = s.number("m-star", m_star);
    return RandomWeightFormula{m, r, e_theta, m_star};
  }
  if (tag == "kernel") {
    KernelSpec k = KernelSpec::epanechnikov();
    if (auto v = s.get("kernel")) k = v->is_string() ? kernel_from_name(v->get<std::string>()) : kernel_from_json(*v);
    return KernelFormula{m, r, k};
  }
  if (tag == "mixed_sign" || tag == "mixed-sign") return MixedSignFormula{m, s.number("alpha", 0.5)};
  if (tag == "cramer" || tag == "chi_star" || tag == "chi-star") {
    const auto law_value = s.get("law");
    if (!law_value) throw FormatError("rate: --law is required for " + tag);
    auto law = parse_law(*law_value);
    if (tag == "cramer") return CramerFormula{law};
    return ChiStarFormula{law, static_cast<int>(s.unsigned_number("nu-max", kDefaultNuMax))};
  }
  throw FormatError("unknown formula '" + tag + "'");
}

int cmd_rate(const Settings& s, Context& ctx) {
  check_format(s);
  const auto formula_text = s.text("formula", "");
  if (formula_text.empty()) throw FormatError("rate: --formula is required");
  std::vector<RateFormula> formulas;
  std::stringstream ss(formula_text);
  std::string tag;
  while (std::getline(ss, tag, ',')) formulas.push_back(build_formula(tag, s));
  for (const auto& f : formulas) validate_formula(f);
  const auto xs = resolve_x(s);
  const auto rows = rate_sweep(formulas, xs);
  const auto dir = prepare_out(s);
  {
    auto f = open_out(dir / "rates.csv");
    write_rate_csv(rows, f);
  }
  write_rate_csv(rows, ctx.out);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

std::vector<std::uint64_t> resolve_theta_seeds(const Settings& s) {
  auto v = s.get("theta-seeds");
  if (!v) v = json(20);
  if (v->is_array()) return v->get<std::vector<std::uint64_t>>();
  std::vector<std::uint64_t> seeds;
  if (v->is_string() && v->get<std::string>().find(',') != std::string::npos) {
    for (auto n : parse_sizes(*v)) seeds.push_back(n);
    return seeds;
  }
  const std::uint64_t count = v->is_string() ? to_u64(v->get<std::string>()) : v->get<std::uint64_t>();
  if (count == 0) throw FormatError("--theta-seeds must be positive");
  for (std::uint64_t k = 1; k <= count; ++k) seeds.push_back(k);
  return seeds;
}

void retag(std::vector<SimulationEstimate>& rows, const std::string& suffix) {
  for (auto& e : rows) e.estimator += suffix;
}

int cmd_simulate(const std::map<std::string, Flag>& flags, const json& raw_config, Context& ctx) {
  // A run manifest nests the plan; a hand-written config may be flat.
  json base = raw_config.contains("plan") ? raw_config.at("plan") : raw_config;
  for (const char* key : {"mode", "theta_seeds", "synthetic_rate"}) {
    if (raw_config.contains(key)) base[key] = raw_config.at(key);
  }
  const Settings s(flags, base);
  check_format(s);

  SimulationPlan plan;
  if (auto v = s.get("model")) plan.model = parse_model(*v);
  if (auto v = s.get("scheme")) plan.scheme = parse_scheme(*v);
  if (s.has("theta") && plan.scheme.is_self_normalized()) {
    plan.scheme = WeightScheme(SelfNormalizedRandom{parse_theta(s.text("theta", "")), 1});
  }
  if (!s.has("n-grid")) throw FormatError("simulate: --n-grid is required");
  plan.n_grid = parse_sizes(*s.get("n-grid"));
  if (!s.has("x")) throw FormatError("simulate: --x is required");
  plan.x = s.number("x", 0.0);
  plan.replications = s.unsigned_number("replications", plan.replications);
  plan.estimator = estimator_from_tag(s.text("estimator", estimator_tag(plan.estimator)));
  plan.seed = resolve_seed(s);
  plan.epsilon = s.number("epsilon", plan.epsilon);
  plan.workers = static_cast<unsigned>(s.unsigned_number("workers", 1));
  const auto theta_mode = s.text("theta-mode", "fixed");
  if (theta_mode == "annealed") {
    plan.theta_mode = ThetaMode::kAnnealed;
  } else if (theta_mode != "fixed") {
    throw FormatError("unknown theta_mode '" + theta_mode + "'");
  }
  const auto mode = s.text("mode", "curve");
  if (mode != "curve" && mode != "quenched" && mode != "annealed" && mode != "paired" &&
      mode != "synthetic") {
    throw FormatError("unknown simulate mode '" + mode + "'");
  }
  if ((mode == "quenched" || mode == "annealed" || mode == "paired") && !plan.scheme.is_self_normalized()) {
    throw FormatError("simulate: mode '" + mode + "' needs a self-normalized scheme");
  }
  check_feasible(plan);

  json manifest = {{"tool", "ldptails"}, {"version", kVersion}, {"command", "simulate"}, {"mode", mode}};
  std::vector<SimulationEstimate> rows;
  if (mode == "curve") {
    rows = rate_curve(plan);
  } else if (mode == "synthetic") {
    const double rate = s.number("synthetic-rate", 1.0);
    manifest["synthetic_rate"] = rate;
    rows = synthetic_curve(plan, rate);
  } else {
    std::vector<std::uint64_t> seeds;
    if (mode != "annealed") {
      seeds = resolve_theta_seeds(s);
      manifest["theta_seeds"] = seeds;
    }
    for (auto seed : seeds) {
      auto q = quenched_run(plan, seed);
      retag(q, ":quenched:" + std::to_string(seed));
      rows.insert(rows.end(), q.begin(), q.end());
    }
    if (mode != "quenched") {
      auto a = annealed_run(plan);
      retag(a, ":annealed");
      rows.insert(rows.end(), a.begin(), a.end());
    }
  }
  manifest["plan"] = plan;

  const auto dir = prepare_out(s);
  {
    auto f = open_out(dir / "estimates.csv");
    write_estimates_csv(rows, f);
  }
  {
    auto f = open_out(dir / "manifest.json");
    f << manifest.dump(2) << "\n";
  }
  for (const auto& e : rows) {
    ctx.out << e.estimator << " n=" << e.n << " p_hat=" << format_number(e.p_hat)
            << " rho=" << format_number(e.rho) << " target=" << format_number(e.target_rate) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- selftest

int cmd_selftest(const Settings& s, const std::vector<std::string>& injected, Context& ctx) {
  SelftestOptions opts;
  if (s.has("tol")) opts.tol = s.number("tol", 0.0);
  opts.seed = resolve_seed(s);
  if (s.config().contains("inject_svf")) {
    for (const auto& v : s.config().at("inject_svf")) opts.injected_svf.push_back(v);
  }
  for (const auto& text : injected) {
    if (!text.empty() && (text.front() == '{' || text.front() == '[')) {
      try {
        opts.injected_svf.push_back(json::parse(text));
      } catch (const json::parse_error& e) {
        throw FormatError(std::string("--inject-svf: ") + e.what());
      }
    } else {
      opts.injected_svf.push_back(read_json_file(text));
    }
  }
  const auto report = run_selftest(opts);

  const bool write_csv = s.has("out");
  if (write_csv) {
    const auto dir = prepare_out(s);
    auto f = open_out(dir / "selftest.csv");
    CsvWriter csv(f);
    csv.header({"suite", "check", "residual", "tolerance", "passed"});
    for (const auto& c : report.checks) {
      csv.row({c.suite, c.name, format_number(c.residual), format_number(c.tolerance), yes_no(c.passed)});
    }
  }
  for (const auto& c : report.checks) {
    if (!c.passed) {
      ctx.out << "FAIL " << c.suite << ": " << c.name << " residual=" << format_number(c.residual)
              << " tol=" << format_number(c.tolerance) << "\n";
    }
  }
  ctx.out << "selftest: " << report.checks.size() << " checks, " << report.failures() << " failed\n";
  return report.failures() == 0 ? kExitOk : kExitCheckFailed;
}

void add_common(CLI::App* sub, std::map<std::string, Flag>& flags) {
  add_flag(sub, flags, "config", "JSON config file (flags override its entries)");
  add_flag(sub, flags, "out", "output directory");
  add_flag(sub, flags, "seed", "64-bit seed (fallback: $LDP_TAILS_SEED)");
  add_flag(sub, flags, "workers", "worker threads (does not change results)");
  add_flag(sub, flags, "format", "output format (csv)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Large-deviation rates for weighted sums of stretched-exponential variables", "ldptails"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::map<std::string, Flag> vw_flags;
  auto* vw = app.add_subcommand("validate-weights", "check weight regularity conditions A/B");
  add_common(vw, vw_flags);
  add_flag(vw, vw_flags, "scheme", "weight scheme tag");
  add_flag(vw, vw_flags, "assumption", "A or B");
  add_flag(vw, vw_flags, "theta", "theta law for self-normalized schemes");
  add_flag(vw, vw_flags, "n-grid", "comma-separated n values");
  add_flag(vw, vw_flags, "nu-max", "largest moment order for A");
  add_flag(vw, vw_flags, "tol", "convergence tolerance");

  std::map<std::string, Flag> rate_flags;
  auto* rate = app.add_subcommand("rate", "sweep analytic rate functions over x");
  add_common(rate, rate_flags);
  for (const char* name : {"formula", "x", "x-grid", "m", "s", "s1", "r", "e-theta", "m-star", "theta",
                           "kernel", "alpha", "law", "nu-max"}) {
    add_flag(rate, rate_flags, name, std::string("formula parameter ") + name);
  }

  std::map<std::string, Flag> sim_flags;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo rate curves");
  add_common(sim, sim_flags);
  for (const char* name : {"model", "scheme", "theta", "n-grid", "x", "replications", "estimator",
                           "epsilon", "mode", "theta-mode", "theta-seeds", "synthetic-rate"}) {
    add_flag(sim, sim_flags, name, std::string("plan parameter ") + name);
  }

  std::map<std::string, Flag> st_flags;
  std::vector<std::string> injected;
  auto* st = app.add_subcommand("selftest", "numeric identity suites");
  add_common(st, st_flags);
  add_flag(st, st_flags, "tol", "override every suite tolerance");
  st->add_option("--inject-svf", injected, "extra slowly varying spec (JSON text or file)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Context ctx{out, err};
  try {
    if (*vw) return cmd_validate_weights(Settings(vw_flags, load_config(vw_flags)), ctx);
    if (*rate) return cmd_rate(Settings(rate_flags, load_config(rate_flags)), ctx);
    if (*sim) return cmd_simulate(sim_flags, load_config(sim_flags), ctx);
    if (*st) return cmd_selftest(Settings(st_flags, load_config(st_flags)), injected, ctx);
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ldptails::cli

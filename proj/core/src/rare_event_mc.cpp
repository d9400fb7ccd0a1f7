#include "ldptails/rare_event_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <nlohmann/json.hpp>

#include "ldptails/counter_rng.hpp"
#include "ldptails/csv.hpp"
#include "ldptails/errors.hpp"
#include "ldptails/rate_functions.hpp"

namespace ldptails {
namespace {

// Running mean and centred second moment (Welford), merged pairwise (Chan et
// al.). A raw sum of squares loses the variance of near-constant estimators.
struct Accumulator {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  // Neumaier-compensated sum of z, so that hit counts give an exact p_hat.
  double sum = 0.0;
  double comp = 0.0;

  void add(double z) {
    accumulate(z);
    count += 1.0;
    const double d = z - mean;
    mean += d / count;
    m2 += d * (z - mean);
  }

  void merge(const Accumulator& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / total;
    m2 += o.m2 + d * d * count * o.count / total;
    count = total;
    accumulate(o.sum);
    accumulate(o.comp);
  }

  double average() const { return count > 0.0 ? (sum + comp) / count : 0.0; }

  void accumulate(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
};

bool stretched_mixed_sign(const SimulationPlan& plan, double* alpha) {
  if (!std::holds_alternative<MixedSignThirds>(plan.scheme.kind())) return false;
  const auto* lower = std::get_if<StretchedLower>(&plan.model.lower_tail());
  if (lower == nullptr || !(lower->alpha < plan.model.r())) return false;
  if (alpha != nullptr) *alpha = lower->alpha;
  return true;
}

// (s1, s) of the scheme, falling back to the last row of a custom table.
WeightLimits plan_limits(const SimulationPlan& plan) {
  if (!std::holds_alternative<CustomTable>(plan.scheme.kind())) return plan.scheme.limits();
  const auto row = generate(plan.scheme, plan.n_grid.back());
  double sum = 0.0;
  double amax = 0.0;
  for (double a : row) {
    sum += a;
    amax = std::max(amax, a);
  }
  return {sum, static_cast<double>(row.size()) * amax};
}

class Kernel {
 public:
  Kernel(const SimulationPlan& plan, std::size_t n, std::span<const double> xs)
      : plan_(plan), n_(n), xs_(xs.begin(), xs.end()), uniforms_(plan.seed) {
    if (n > 0xFFFFFFFFu) throw DomainError("simulation: n exceeds 2^32 - 1");
    if (plan.theta_mode == ThetaMode::kFixed) fixed_row_ = generate(plan.scheme, n);
  }

  // Adds replications [begin, end) into acc (one entry per x).
  void run(std::uint64_t begin, std::uint64_t end, std::vector<Accumulator>& acc) const {
    std::vector<double> row_buf;
    std::vector<double> theta(n_);
    std::vector<double> weighted(n_);
    std::vector<std::size_t> nonzero;
    const auto n32 = static_cast<std::uint32_t>(n_);
    const SelfNormalizedRandom* snr = std::get_if<SelfNormalizedRandom>(&plan_.scheme.kind());

    if (plan_.theta_mode == ThetaMode::kFixed) collect_nonzero(fixed_row_, nonzero);
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::vector<double>* row = &fixed_row_;
      if (plan_.theta_mode == ThetaMode::kAnnealed) {
        double total = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
          theta[j] = snr->theta.sample(
              uniforms_(Stream::kAnnealedTheta, n32, i, static_cast<std::uint32_t>(j + 1)));
          total += theta[j];
        }
        if (!(total > 0.0)) throw DomainError("annealed weights: theta sums to zero");
        row_buf.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) row_buf[j] = theta[j] / total;
        row = &row_buf;
        collect_nonzero(*row, nonzero);
      }
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        const double xj =
            sample(plan_.model, uniforms_(Stream::kSample, n32, i, static_cast<std::uint32_t>(j + 1)));
        weighted[j] = (*row)[j] * xj;
        s += weighted[j];
      }
      if (plan_.estimator == Estimator::kNaive) {
        for (std::size_t k = 0; k < xs_.size(); ++k) {
          acc[k].add(s >= xs_[k] ? 1.0 : 0.0);
        }
        continue;
      }
      if (nonzero.empty()) {
        for (std::size_t k = 0; k < xs_.size(); ++k) {
          acc[k].add(0.0 >= xs_[k] ? 1.0 : 0.0);
        }
        continue;
      }
      const auto count = static_cast<double>(nonzero.size());
      const double u = uniforms_(Stream::kIndex, n32, i, 0);
      const std::size_t pick = std::min(nonzero.size() - 1, static_cast<std::size_t>(u * count));
      const std::size_t big = nonzero[pick];
      double others_max = -kInfinity;
      for (std::size_t j : nonzero) {
        if (j != big) others_max = std::max(others_max, weighted[j]);
      }
      const double rest = s - weighted[big];
      const double a = (*row)[big];
      for (std::size_t k = 0; k < xs_.size(); ++k) {
        const double threshold = std::max(others_max, xs_[k] - rest);
        const double prob = a > 0.0 ? plan_.model.survival(threshold / a)
                                    : 1.0 - plan_.model.survival(threshold / a);
        acc[k].add(count * prob);
      }
    }
  }

 private:
  static void collect_nonzero(const std::vector<double>& row, std::vector<std::size_t>& out) {
    out.clear();
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0.0) out.push_back(j);
    }
  }

  const SimulationPlan& plan_;
  std::size_t n_;
  std::vector<double> xs_;
  CounterUniforms uniforms_;
  std::vector<double> fixed_row_;
};

std::vector<Accumulator> run_blocks(const SimulationPlan& plan, std::size_t n,
                                    std::span<const double> xs) {
  const Kernel kernel(plan, n, xs);
  const std::uint64_t total = plan.replications;
  const std::uint64_t blocks = (total + kBlockSize - 1) / kBlockSize;
  std::vector<std::vector<Accumulator>> per_block(blocks, std::vector<Accumulator>(xs.size()));

  unsigned workers = plan.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : plan.workers;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(blocks, 1)));

  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      const std::uint64_t begin = b * kBlockSize;
      kernel.run(begin, std::min(total, begin + kBlockSize), per_block[b]);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work();
        } catch (...) {
          errors[w] = std::current_exception();
          next = blocks;
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<Accumulator> merged(xs.size());
  for (const auto& block : per_block) {
    for (std::size_t k = 0; k < xs.size(); ++k) merged[k].merge(block[k]);
  }
  return merged;
}

SimulationEstimate finish(const SimulationPlan& plan, std::size_t n, double x, const Accumulator& acc,
                          double m) {
  const auto big_n = static_cast<double>(plan.replications);
  SimulationEstimate e;
  e.estimator = estimator_tag(plan.estimator);
  e.n = n;
  e.x = x;
  e.replications = plan.replications;
  e.seed = plan.seed;
  e.p_hat = acc.average();
  e.std_err = std::sqrt(std::max(0.0, acc.m2) / (big_n - 1.0) / big_n);
  // (sum z)^2 / sum z^2
  const double second = acc.m2 / big_n + e.p_hat * e.p_hat;
  e.effective_sample_size = second > 0.0 ? big_n * e.p_hat * e.p_hat / second : 0.0;
  e.p_upper = e.p_hat > 0.0 ? e.p_hat : clopper_pearson_zero_upper(plan.replications);
  e.rho = normalized_rho(e.p_hat, rate_speed(plan, n));

  SimulationPlan at_x = plan;
  at_x.x = x;
  try {
    e.target_rate = target_rate(at_x);
  } catch (const DomainError&) {
    e.target_rate = kInfinity;
  }
  std::vector<double> row = generate(plan.scheme, n);
  bool any = std::any_of(row.begin(), row.end(), [](double a) { return a > 0.0; });
  e.t1 = any ? t1_threshold(n, x, row, m, plan.epsilon) : kInfinity;
  const auto lim = plan_limits(plan);
  e.t2 = t2_threshold(n, x, lim.s1, lim.s, m);
  return e;
}

}  // namespace

std::string estimator_tag(Estimator e) { return e == Estimator::kNaive ? "naive" : "big_jump_is"; }

Estimator estimator_from_tag(const std::string& tag) {
  if (tag == "naive") return Estimator::kNaive;
  if (tag == "big_jump_is" || tag == "is") return Estimator::kBigJumpIS;
  throw FormatError("unknown estimator '" + tag + "'");
}

namespace {

// Everything validate_plan checks except the n grid.
void validate_settings(const SimulationPlan& plan) {
  if (plan.replications < kMinReplications) throw DomainError("simulation plan: need N >= 1000");
  if (!(plan.epsilon > 0.0) || !std::isfinite(plan.epsilon)) {
    throw DomainError("simulation plan: epsilon must be positive");
  }
  if (!std::isfinite(plan.x)) throw DomainError("simulation plan: x must be finite");
  if (plan.theta_mode == ThetaMode::kAnnealed && !plan.scheme.is_self_normalized()) {
    throw DomainError("simulation plan: annealed runs need a self-normalized scheme");
  }
}

}  // namespace

void validate_plan(const SimulationPlan& plan) {
  if (plan.n_grid.empty()) throw DomainError("simulation plan: empty n grid");
  for (std::size_t n : plan.n_grid) {
    if (n == 0) throw DomainError("simulation plan: n must be positive");
  }
  validate_settings(plan);
}

void check_feasible(const SimulationPlan& plan) {
  validate_plan(plan);
  const double m = mean(plan.model);
  const double s1 = plan_limits(plan).s1;
  if (!(plan.x > s1 * m)) {
    throw DomainError("simulation plan: x = " + format_number(plan.x) + " is not above s1 m = " +
                      format_number(s1 * m));
  }
}

double weighted_sum(std::span<const double> row, std::span<const double> xs) {
  if (row.size() != xs.size()) throw DomainError("weighted_sum: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * xs[j];
  return s;
}

double t1_threshold(std::size_t n, double x, std::span<const double> row, double m, double epsilon) {
  double sum = 0.0;
  double amax = 0.0;
  for (double a : row) {
    sum += a;
    amax = std::max(amax, a);
  }
  if (!(amax > 0.0)) throw DomainError("t1_threshold: row has no positive weight");
  const auto dn = static_cast<double>(n);
  return dn * (x - m * sum + m * amax + epsilon) / (dn * amax);
}

double t2_threshold(std::size_t n, double x, double s1, double s, double m) {
  if (!(s > 0.0)) throw DomainError("t2_threshold: s must be positive");
  return static_cast<double>(n) * (x / s - s1 * m / s);
}

double rate_speed(const SimulationPlan& plan, std::size_t n) {
  const auto dn = static_cast<double>(n);
  double alpha = 0.0;
  if (stretched_mixed_sign(plan, &alpha)) return std::pow(dn, alpha);
  return plan.model.b()(dn) * std::pow(dn, plan.model.r());
}

double normalized_rho(double p, double speed) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("normalized_rho: p must lie in [0, 1]");
  if (p == 0.0) return kInfinity;
  if (p == 1.0) return 0.0;
  return -std::log(p) / speed;
}

double target_rate(const SimulationPlan& plan) {
  const double m = mean(plan.model);
  double alpha = 0.0;
  if (stretched_mixed_sign(plan, &alpha)) return mixed_sign_rate(plan.x, m, alpha);
  const auto lim = plan_limits(plan);
  return stretched_rate({plan.x, m, lim.s, lim.s1, plan.model.r()});
}

double clopper_pearson_zero_upper(std::uint64_t replications) {
  return -std::expm1(std::log(0.05) / static_cast<double>(replications));
}

std::vector<SimulationEstimate> simulate_x_grid(const SimulationPlan& plan, std::size_t n,
                                                std::span<const double> xs) {
  if (n == 0) throw DomainError("simulation: n must be positive");
  validate_settings(plan);
  const auto acc = run_blocks(plan, n, xs);
  const double m = mean(plan.model);
  std::vector<SimulationEstimate> out;
  for (std::size_t k = 0; k < xs.size(); ++k) out.push_back(finish(plan, n, xs[k], acc[k], m));
  return out;
}

SimulationEstimate simulate_naive(const SimulationPlan& plan, std::size_t n) {
  SimulationPlan p = plan;
  p.estimator = Estimator::kNaive;
  const double xs[] = {plan.x};
  return simulate_x_grid(p, n, xs).front();
}

SimulationEstimate simulate_big_jump_is(const SimulationPlan& plan, std::size_t n) {
  SimulationPlan p = plan;
  p.estimator = Estimator::kBigJumpIS;
  const double xs[] = {plan.x};
  return simulate_x_grid(p, n, xs).front();
}

std::vector<SimulationEstimate> rate_curve(const SimulationPlan& plan) {
  check_feasible(plan);
  std::vector<SimulationEstimate> out;
  const double xs[] = {plan.x};
  for (std::size_t n : plan.n_grid) out.push_back(simulate_x_grid(plan, n, xs).front());
  return out;
}

std::vector<SimulationEstimate> quenched_run(const SimulationPlan& plan, std::uint64_t theta_seed) {
  if (!plan.scheme.is_self_normalized()) throw DomainError("quenched_run: scheme is not self-normalized");
  SimulationPlan p = plan;
  p.scheme = plan.scheme.with_theta_seed(theta_seed);
  p.theta_mode = ThetaMode::kFixed;
  return rate_curve(p);
}

std::vector<SimulationEstimate> annealed_run(const SimulationPlan& plan) {
  if (!plan.scheme.is_self_normalized()) throw DomainError("annealed_run: scheme is not self-normalized");
  SimulationPlan p = plan;
  p.theta_mode = ThetaMode::kAnnealed;
  return rate_curve(p);
}

std::vector<SimulationEstimate> synthetic_curve(const SimulationPlan& plan, double rate) {
  check_feasible(plan);
  const double m = mean(plan.model);
  std::vector<SimulationEstimate> out;
  for (std::size_t n : plan.n_grid) {
    const double p = std::exp(-rate * rate_speed(plan, n));
    Accumulator acc;
    acc.add(p);
    auto e = finish(plan, n, plan.x, acc, m);
    e.estimator = "synthetic";
    out.push_back(e);
  }
  return out;
}

void write_estimates_csv(std::span<const SimulationEstimate> rows, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"estimator", "n", "x", "N", "p_hat", "std_err", "rho", "target_rate", "t1", "t2", "seed",
              "p_upper"});
  for (const auto& e : rows) {
    csv.row({e.estimator, std::to_string(e.n), format_number(e.x), std::to_string(e.replications),
             format_number(e.p_hat), format_number(e.std_err), format_number(e.rho),
             format_number(e.target_rate), format_number(e.t1), format_number(e.t2),
             std::to_string(e.seed), format_number(e.p_upper)});
  }
}

void to_json(nlohmann::json& j, const SimulationPlan& plan) {
  j = {{"model", plan.model},
       {"scheme", plan.scheme},
       {"n_grid", plan.n_grid},
       {"x", plan.x},
       {"replications", plan.replications},
       {"estimator", estimator_tag(plan.estimator)},
       {"seed", plan.seed},
       {"epsilon", plan.epsilon},
       {"theta_mode", plan.theta_mode == ThetaMode::kAnnealed ? "annealed" : "fixed"},
       {"workers", plan.workers}};
}

SimulationPlan simulation_plan_from_json(const nlohmann::json& j) {
  try {
    SimulationPlan plan;
    if (j.contains("model")) plan.model = tail_model_from_json(j.at("model"));
    if (j.contains("scheme")) plan.scheme = weight_scheme_from_json(j.at("scheme"));
    plan.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    plan.x = j.at("x").get<double>();
    plan.replications = j.value("replications", plan.replications);
    plan.estimator = estimator_from_tag(j.value("estimator", std::string("big_jump_is")));
    plan.seed = j.value("seed", plan.seed);
    plan.epsilon = j.value("epsilon", plan.epsilon);
    const auto mode = j.value("theta_mode", std::string("fixed"));
    if (mode == "annealed") {
      plan.theta_mode = ThetaMode::kAnnealed;
    } else if (mode != "fixed") {
      throw FormatError("simulation plan: unknown theta_mode '" + mode + "'");
    }
    plan.workers = j.value("workers", plan.workers);
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("simulation plan: ") + e.what());
  }
}

}  // namespace ldptails

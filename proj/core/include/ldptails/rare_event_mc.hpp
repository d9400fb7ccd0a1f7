#pragma once

// Monte Carlo estimates of P(S_n >= x), S_n = sum_j a_j(n) X_j.
//
// Draws are addressed by (seed, stream, n, replication, coordinate) through a
// counter-based generator, and replications are reduced in fixed blocks of
// kBlockSize merged in block order. Estimates are therefore bit-identical for
// any worker count.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ldptails/tail_models.hpp"
#include "ldptails/weight_schemes.hpp"

namespace ldptails {

enum class Estimator { kNaive, kBigJumpIS };

/// How self-normalized weights are handled: kFixed uses the scheme's own seed
/// for every replication (quenched); kAnnealed redraws theta per replication.
enum class ThetaMode { kFixed, kAnnealed };

inline constexpr std::size_t kBlockSize = 4096;
inline constexpr std::uint64_t kMinReplications = 1000;

struct SimulationPlan {
  TailModel model = TailModel::exact_weibull(0.5);
  WeightScheme scheme = WeightScheme(UniformWeights{});
  std::vector<std::size_t> n_grid;
  double x = 0.0;
  std::uint64_t replications = 100000;
  Estimator estimator = Estimator::kBigJumpIS;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  ThetaMode theta_mode = ThetaMode::kFixed;
  /// Worker threads; 0 means one per hardware thread. Never affects results.
  unsigned workers = 1;
};

struct SimulationEstimate {
  std::string estimator;
  std::size_t n = 0;
  double x = 0.0;
  std::uint64_t replications = 0;
  double p_hat = 0.0;
  double std_err = 0.0;
  double rho = 0.0;
  double target_rate = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  std::uint64_t seed = 0;
  double effective_sample_size = 0.0;
  /// One-sided 95% Clopper-Pearson upper bound on p when p_hat = 0, else p_hat.
  double p_upper = 0.0;
};

std::string estimator_tag(Estimator e);
Estimator estimator_from_tag(const std::string& tag);

/// Throws DomainError on an empty or non-positive n grid, N < 1000, epsilon <= 0,
/// annealing on a scheme that is not self-normalized, or big-jump sampling
/// with an empty model.
void validate_plan(const SimulationPlan& plan);

/// Throws DomainError unless x > s1 m.
void check_feasible(const SimulationPlan& plan);

/// Dot product; throws DomainError on length mismatch.
double weighted_sum(std::span<const double> row, std::span<const double> xs);

/// [n (x - m sum a + m a_max + epsilon)] / (n a_max). Throws DomainError for
/// an all-zero row.
double t1_threshold(std::size_t n, double x, std::span<const double> row, double m, double epsilon);

/// n (x/s - s1 m / s).
double t2_threshold(std::size_t n, double x, double s1, double s, double m);

/// Normalizing speed: b(n) n^r, or n^alpha for the mixed-sign scheme under a
/// stretched lower tail with alpha < r.
double rate_speed(const SimulationPlan& plan, std::size_t n);

/// -log(p) / speed; +infinity for p = 0.
double normalized_rho(double p, double speed);

/// Limit of the normalized rate for this plan.
double target_rate(const SimulationPlan& plan);

/// 1 - 0.05^{1/N}.
double clopper_pearson_zero_upper(std::uint64_t replications);

/// Single-n estimates; the plan's n grid is ignored.
SimulationEstimate simulate_naive(const SimulationPlan& plan, std::size_t n);
SimulationEstimate simulate_big_jump_is(const SimulationPlan& plan, std::size_t n);

/// Same draws for every x: one estimate per x, in order.
std::vector<SimulationEstimate> simulate_x_grid(const SimulationPlan& plan, std::size_t n,
                                                std::span<const double> xs);

/// The plan's estimator over its n grid, with rho and the analytic target.
std::vector<SimulationEstimate> rate_curve(const SimulationPlan& plan);

/// Quenched curve with theta frozen by `theta_seed`.
std::vector<SimulationEstimate> quenched_run(const SimulationPlan& plan, std::uint64_t theta_seed);
/// Annealed curve: theta_1..theta_n redrawn per replication.
std::vector<SimulationEstimate> annealed_run(const SimulationPlan& plan);

/// Estimates built from p = exp(-rate * speed(n)), for checking the
/// normalization end to end.
std::vector<SimulationEstimate> synthetic_curve(const SimulationPlan& plan, double rate);

/// CSV with columns estimator,n,x,N,p_hat,std_err,rho,target_rate,t1,t2,seed,p_upper.
void write_estimates_csv(std::span<const SimulationEstimate> rows, std::ostream& out);

void to_json(nlohmann::json& j, const SimulationPlan& plan);
SimulationPlan simulation_plan_from_json(const nlohmann::json& j);

}  // namespace ldptails

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldptails/errors.hpp"
#include "ldptails/rare_event_mc.hpp"
#include "ldptails/rate_functions.hpp"
#include "oracles.hpp"

using namespace ldptails;

namespace {

SimulationPlan weibull_plan(double x, std::uint64_t reps, Estimator est, std::uint64_t seed = 1) {
  SimulationPlan p;
  p.model = TailModel::exact_weibull(0.5);
  p.scheme = WeightScheme(UniformWeights{});
  p.x = x;
  p.replications = reps;
  p.estimator = est;
  p.seed = seed;
  return p;
}

bool within(const SimulationEstimate& e, double truth, double k) {
  return std::abs(e.p_hat - truth) <= k * e.std_err;
}

}  // namespace

TEST_CASE("weighted_sum: worked examples") {
  CHECK(weighted_sum(std::vector<double>(4, 0.25), std::vector<double>(4, 2.0)) == 2.0);
  CHECK(weighted_sum(std::vector<double>{1.0}, std::vector<double>{3.25}) == 3.25);
  CHECK(weighted_sum(std::vector<double>{0.375, 0.0}, std::vector<double>{10.0, 99.0}) == 3.75);
  CHECK_THROWS_AS(weighted_sum(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), DomainError);
}

TEST_CASE("t1 and t2 thresholds") {
  const std::vector<double> uniform10(10, 0.1);
  CHECK(t1_threshold(10, 4.0, uniform10, 2.0, 0.1) == doctest::Approx(23.0).epsilon(1e-14));
  CHECK(t1_threshold(1, 4.0, std::vector<double>{1.0}, 2.0, 0.1) == doctest::Approx(4.1).epsilon(1e-14));
  const std::vector<double> uniform50(50, 0.02);
  CHECK(t1_threshold(50, 4.0, uniform50, 2.0, 1e-12) == doctest::Approx(50 * (4.0 - 2.0) + 2.0).epsilon(1e-9));
  CHECK_THROWS_AS(t1_threshold(2, 4.0, std::vector<double>{0.0, 0.0}, 2.0, 0.1), DomainError);
  CHECK(t2_threshold(16, 4.0, 1.0, 1.0, 2.0) == 32.0);
}

TEST_CASE("normalization helpers") {
  CHECK(normalized_rho(std::exp(-3.0), 1.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(normalized_rho(0.0, 2.0) == std::numeric_limits<double>::infinity());
  CHECK(normalized_rho(1.0, 2.0) == 0.0);
  CHECK(clopper_pearson_zero_upper(1000) == doctest::Approx(1.0 - std::pow(0.05, 1e-3)).epsilon(1e-14));
  const auto plan = weibull_plan(4.0, 1000, Estimator::kNaive);
  CHECK(rate_speed(plan, 64) == doctest::Approx(8.0));
  CHECK(target_rate(plan) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("mixed-sign plans use the lower-tail speed") {
  SimulationPlan p = weibull_plan(1.0, 1000, Estimator::kNaive);
  p.model = TailModel::exact_weibull(0.5, StretchedLower{0.3}, 1.0);
  p.scheme = WeightScheme(MixedSignThirds{});
  CHECK(rate_speed(p, 1000) == doctest::Approx(std::pow(1000.0, 0.3)).epsilon(1e-14));
  CHECK(target_rate(p) == doctest::Approx(mixed_sign_rate(1.0, mean(p.model), 0.3)).epsilon(1e-12));
}

TEST_CASE("plan validation and feasibility") {
  auto p = weibull_plan(4.0, 999, Estimator::kNaive);
  p.n_grid = {4};
  CHECK_THROWS_AS(validate_plan(p), DomainError);
  p.replications = 1000;
  CHECK_NOTHROW(validate_plan(p));
  p.epsilon = 0.0;
  CHECK_THROWS_AS(validate_plan(p), DomainError);
  p.epsilon = 0.1;
  p.n_grid = {};
  CHECK_THROWS_AS(validate_plan(p), DomainError);
  p.n_grid = {4};
  p.theta_mode = ThetaMode::kAnnealed;
  CHECK_THROWS_AS(validate_plan(p), DomainError);
  p.theta_mode = ThetaMode::kFixed;
  p.x = 2.0;
  CHECK_THROWS_AS(check_feasible(p), DomainError);
  CHECK_THROWS_AS(rate_curve(p), DomainError);
}

TEST_CASE("naive estimator: trivial and exact cases") {
  const auto below = simulate_naive(weibull_plan(-1.0, 1000, Estimator::kNaive), 3);
  CHECK(below.p_hat == 1.0);
  CHECK(below.rho == 0.0);
  const auto n1 = simulate_naive(weibull_plan(4.0, 1000000, Estimator::kNaive), 1);
  CHECK(within(n1, testing::kSurvivalAt4, 4.0));
}

TEST_CASE("naive p_hat is an exact hit fraction") {
  for (std::uint64_t reps : {2000u, 4097u, 30000u}) {
    const auto e = simulate_naive(weibull_plan(3.0, reps, Estimator::kNaive, 5), 4);
    const double hits = std::round(e.p_hat * static_cast<double>(reps));
    CHECK(e.p_hat == hits / static_cast<double>(reps));
  }
}

TEST_CASE("big-jump estimator is exact for a single summand") {
  // several blocks, so the merge is exercised too
  const auto est = simulate_big_jump_is(weibull_plan(6.0, 5 * kBlockSize + 3, Estimator::kBigJumpIS), 1);
  CHECK(est.p_hat == doctest::Approx(testing::kSurvivalAt6).epsilon(1e-15));
  CHECK(est.std_err == 0.0);
  CHECK(est.effective_sample_size == doctest::Approx(static_cast<double>(est.replications)));
}

TEST_CASE("big-jump estimator against quadrature oracles over ten seeds") {
  struct Case {
    std::size_t n;
    double x;
    double truth;
  };
  const Case cases[] = {
      {1, 4.0, testing::kSurvivalAt4}, {2, 4.0, testing::kPairAt4},   {2, 6.0, testing::kPairAt6},
      {3, 4.0, testing::kTripleAt4},   {3, 6.0, testing::kTripleAt6},
  };
  for (auto [n, x, truth] : cases) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto est = simulate_big_jump_is(weibull_plan(x, 100000, Estimator::kBigJumpIS, seed), n);
      CHECK(std::abs(est.p_hat - truth) <= 3.0 * est.std_err + 1e-15);
    }
  }
}

TEST_CASE("naive and big-jump agree where both are informative") {
  const double x = 11.5;
  const auto naive = simulate_naive(weibull_plan(x, 1000000, Estimator::kNaive, 3), 16);
  const auto is = simulate_big_jump_is(weibull_plan(x, 100000, Estimator::kBigJumpIS, 4), 16);
  CHECK(naive.p_hat > 5e-5);
  CHECK(naive.p_hat < 2e-4);
  const double combined = std::hypot(naive.std_err, is.std_err);
  CHECK(std::abs(naive.p_hat - is.p_hat) <= 3.0 * combined);
  // per-sample variance
  const double var_naive = naive.std_err * naive.std_err * static_cast<double>(naive.replications);
  const double var_is = is.std_err * is.std_err * static_cast<double>(is.replications);
  CHECK(var_is * 10.0 <= var_naive);
}

TEST_CASE("estimates do not depend on the worker count") {
  for (auto est : {Estimator::kNaive, Estimator::kBigJumpIS}) {
    auto p = weibull_plan(4.0, 3 * kBlockSize + 17, est, 5);
    p.n_grid = {8, 32};
    p.workers = 1;
    const auto one = rate_curve(p);
    p.workers = 4;
    const auto four = rate_curve(p);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].p_hat == four[i].p_hat);
      CHECK(one[i].std_err == four[i].std_err);
    }
  }
}

TEST_CASE("p_hat is nonincreasing in x under common random numbers") {
  for (auto est : {Estimator::kNaive, Estimator::kBigJumpIS}) {
    const auto p = weibull_plan(0.0, 20000, est, 9);
    const std::vector<double> xs{2.5, 3.0, 4.0, 6.0, 9.0};
    const auto rows = simulate_x_grid(p, 16, xs);
    REQUIRE(rows.size() == xs.size());
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].p_hat <= rows[i - 1].p_hat);
  }
}

TEST_CASE("synthetic injection reproduces the injected rate") {
  auto p = weibull_plan(4.0, 1000, Estimator::kBigJumpIS);
  p.n_grid = {4, 16, 64, 256};
  for (const auto& e : synthetic_curve(p, 1.0)) CHECK(e.rho == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& e : synthetic_curve(p, 0.37)) CHECK(e.rho == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("zero hits report an upper bound instead of a number") {
  auto p = weibull_plan(400.0, 1000, Estimator::kNaive);
  p.n_grid = {4};
  const auto rows = rate_curve(p);
  CHECK(rows[0].p_hat == 0.0);
  CHECK(std::isinf(rows[0].rho));
  CHECK(rows[0].p_upper == doctest::Approx(clopper_pearson_zero_upper(1000)));
}

TEST_CASE("degenerate theta: quenched and annealed runs equal the uniform run") {
  auto p = weibull_plan(4.0, 5000, Estimator::kBigJumpIS, 21);
  p.n_grid = {16, 64};
  const auto uniform = rate_curve(p);
  p.scheme = WeightScheme(SelfNormalizedRandom{ThetaDistribution(ThetaDegenerate{1.0}), 3});
  const auto quenched = quenched_run(p, 8);
  p.theta_mode = ThetaMode::kAnnealed;
  const auto annealed = annealed_run(p);
  for (std::size_t i = 0; i < uniform.size(); ++i) {
    CHECK(quenched[i].p_hat == uniform[i].p_hat);
    CHECK(annealed[i].p_hat == uniform[i].p_hat);
    CHECK(quenched[i].target_rate == doctest::Approx(uniform[i].target_rate));
  }
}

TEST_CASE("random weights share the target rate") {
  auto p = weibull_plan(4.0, 2000, Estimator::kBigJumpIS);
  p.n_grid = {32};
  p.scheme = WeightScheme(SelfNormalizedRandom{ThetaDistribution(ThetaUniform{0.0, 1.0}), 3});
  CHECK(target_rate(p) == doctest::Approx(1.0).epsilon(1e-14));
  const auto q = quenched_run(p, 2);
  p.theta_mode = ThetaMode::kAnnealed;
  const auto a = annealed_run(p);
  CHECK(q[0].target_rate == a[0].target_rate);
  CHECK(q[0].p_hat != a[0].p_hat);
}

TEST_CASE("signed weights: naive and big-jump agree") {
  SimulationPlan p = weibull_plan(1.0, 200000, Estimator::kNaive, 2);
  p.model = TailModel::exact_weibull(0.5, StretchedLower{0.3}, 1.0);
  p.scheme = WeightScheme(MixedSignThirds{});
  const auto naive = simulate_naive(p, 6);
  p.estimator = Estimator::kBigJumpIS;
  const auto is = simulate_big_jump_is(p, 6);
  CHECK(std::abs(naive.p_hat - is.p_hat) <= 3.0 * std::hypot(naive.std_err, is.std_err));
}

TEST_CASE("estimates csv") {
  auto p = weibull_plan(4.0, 1000, Estimator::kBigJumpIS, 11);
  p.n_grid = {4};
  const auto rows = rate_curve(p);
  std::ostringstream out;
  write_estimates_csv(rows, out);
  const std::string s = out.str();
  CHECK(s.rfind("estimator,n,x,N,p_hat,std_err,rho,target_rate,t1,t2,seed,p_upper\nbig_jump_is,4,4,1000,", 0) == 0);
}

TEST_CASE("plan json round trip") {
  auto p = weibull_plan(4.5, 12345, Estimator::kNaive, 0xdeadbeefcafeULL);
  p.n_grid = {3, 9};
  p.epsilon = 0.25;
  p.scheme = WeightScheme(SelfNormalizedRandom{ThetaDistribution(ThetaUniform{0.1, 0.9}), 77});
  p.theta_mode = ThetaMode::kAnnealed;
  nlohmann::json j;
  to_json(j, p);
  const auto back = simulation_plan_from_json(j);
  nlohmann::json j2;
  to_json(j2, back);
  CHECK(j == j2);
  CHECK(back.seed == p.seed);
  CHECK(estimator_from_tag("is") == Estimator::kBigJumpIS);
  CHECK(estimator_tag(Estimator::kNaive) == "naive");
  CHECK_THROWS(estimator_from_tag("magic"));
}

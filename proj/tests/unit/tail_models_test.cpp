#include <doctest.h>

#include <cmath>
#include <limits>

#include "ldptails/counter_rng.hpp"
#include "ldptails/errors.hpp"
#include "ldptails/tail_models.hpp"
#include "oracles.hpp"

using namespace ldptails;
using S = svf::SlowlyVaryingSpec;

namespace {

TailModel envelope_example() {
  return TailModel::bounded_below_envelope(0.3, S::constant(1.0), S::constant(0.5), S::constant(2.0),
                                           10.0, 0.0);
}

}  // namespace

TEST_CASE("survival_bounds: worked examples") {
  const auto w = TailModel::exact_weibull(0.5);
  const auto b4 = survival_bounds(w, 4.0);
  CHECK(b4.lower == doctest::Approx(testing::kSurvivalAt4).epsilon(1e-15));
  CHECK(b4.upper == doctest::Approx(testing::kSurvivalAt4).epsilon(1e-15));
  const auto b0 = survival_bounds(w, 0.0);
  CHECK(b0.lower == 1.0);
  CHECK(b0.upper == 1.0);

  const auto env = envelope_example();
  const double core = std::exp(-std::pow(10.0, 0.3));
  const auto be = survival_bounds(env, 10.0);
  CHECK(be.lower == doctest::Approx(0.5 * core).epsilon(1e-14));
  CHECK(be.upper == doctest::Approx(2.0 * core).epsilon(1e-14));
}

TEST_CASE("survival_bounds lower <= upper and the envelope survival sits inside") {
  for (const auto& m : model_catalogue()) {
    for (double t = -5.0; t < 400.0; t += 0.37) {
      const auto b = survival_bounds(m, t);
      CHECK(b.lower <= b.upper);
      CHECK(b.upper <= 1.0);
      if (t >= m.t_star()) {
        CHECK(m.survival(t) >= b.lower * (1.0 - 1e-9));
        CHECK(m.survival(t) <= b.upper * (1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("sample: worked examples") {
  const auto w = TailModel::exact_weibull(0.5);
  CHECK(sample(w, std::exp(-2.0)) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(sample(w, 1.0 - 1e-15) < 1e-20);
  CHECK(sample(w, 1.0 - 1e-15) >= 0.0);
  CHECK(sample(TailModel::shifted_exact_weibull(0.5, -1.0), std::exp(-2.0)) ==
        doctest::Approx(3.0).epsilon(1e-14));
  CHECK_THROWS_AS(sample(w, 0.0), DomainError);
  CHECK_THROWS_AS(sample(w, 1.0), DomainError);
  CHECK_THROWS_AS(sample(w, std::nan("")), DomainError);
}

TEST_CASE("sample is nonincreasing in u") {
  for (const auto& m : model_catalogue()) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i < 2000; ++i) {
      const double u = i / 2000.0;
      const double x = sample(m, u);
      CHECK(x <= prev);
      prev = x;
    }
  }
}

TEST_CASE("sampler reproduces the survival of ExactWeibull") {
  const CounterUniforms u(99);
  const std::uint64_t n = 1000000;
  for (double r : {0.5, 0.25}) {
    const auto w = TailModel::exact_weibull(r);
    std::uint64_t hits1 = 0, hits4 = 0, hits9 = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const double x = sample(w, u(Stream::kSample, 1, i, 0));
      hits1 += x >= 1.0;
      hits4 += x >= 4.0;
      hits9 += x >= 9.0;
    }
    const auto check = [&](std::uint64_t hits, double t) {
      const double p = std::exp(-std::pow(t, r));
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      CHECK(std::abs(static_cast<double>(hits) / static_cast<double>(n) - p) < 4.0 * se);
    };
    check(hits1, 1.0);
    check(hits4, 4.0);
    check(hits9, 9.0);
  }
}

TEST_CASE("mean and moments: worked examples") {
  CHECK(mean(TailModel::exact_weibull(0.5)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(mean(TailModel::shifted_exact_weibull(0.5, -2.0))) < 1e-8);
  CHECK(mean(TailModel::exact_weibull(0.25)) == doctest::Approx(24.0).epsilon(1e-9));
  CHECK(moment(TailModel::exact_weibull(0.5), 2) == doctest::Approx(24.0).epsilon(1e-8));
  CHECK(moment(TailModel::exact_weibull(0.5), 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(moment(TailModel::shifted_exact_weibull(0.5, 0.0), 1) ==
        doctest::Approx(mean(TailModel::exact_weibull(0.5))).epsilon(1e-12));
  CHECK_THROWS_AS(moment(TailModel::exact_weibull(0.5), 0), DomainError);
}

TEST_CASE("moments agree with an independent Simpson oracle") {
  for (double r : {0.5, 0.4}) {
    const auto w = TailModel::exact_weibull(r);
    for (int k = 1; k <= 4; ++k) {
      const double oracle = testing::weibull_expectation([k](double x) { return std::pow(x, k); }, r);
      CHECK(moment(w, k) == doctest::Approx(oracle).epsilon(1e-7));
      CHECK(moment(w, k) == doctest::Approx(std::tgamma(1.0 + k / r)).epsilon(1e-8));
    }
  }
}

TEST_CASE("mean and first moment agree for every family") {
  for (const auto& m : model_catalogue()) CHECK(std::abs(mean(m) - moment(m, 1)) <= 1e-8);
}

TEST_CASE("stretched lower tail") {
  const auto m = TailModel::exact_weibull(0.5, StretchedLower{0.3}, 1.0);
  const double q = std::exp(-1.0);
  CHECK(m.lower_branch_mass() == doctest::Approx(q).epsilon(1e-15));
  CHECK(m.survival(4.0) == doctest::Approx((1.0 - q) * std::exp(-2.0)).epsilon(1e-14));
  CHECK(m.survival(-8.0) == doctest::Approx(1.0 - std::exp(-std::pow(8.0, 0.3))).epsilon(1e-14));
  CHECK(m.lower_bound() == -std::numeric_limits<double>::infinity());
  CHECK(sample(m, 0.5 * (1.0 - q)) > 0.0);
  CHECK(sample(m, 1.0 - 0.5 * q) < -1.0);
}

TEST_CASE("integration_by_parts_residual: worked examples") {
  CHECK(integration_by_parts_residual(TailModel::exact_weibull(0.5), 0.1, 1.0, 10.0) <= 1e-6);
  CHECK(integration_by_parts_residual(TailModel::shifted_exact_weibull(0.5, -1.0), 0.05, 0.0, 20.0) <= 1e-6);
  for (const auto& m : model_catalogue()) {
    CHECK(integration_by_parts_residual(m, 0.1, 5.0 - 1e-12, 5.0) < 1e-10);
  }
  CHECK_THROWS_AS(integration_by_parts_residual(TailModel::exact_weibull(0.5), 0.0, 1.0, 2.0), DomainError);
}

TEST_CASE("integration by parts holds over the documented grid") {
  for (const auto& m : model_catalogue()) {
    for (double alpha : {0.1, 0.5}) {
      for (auto [a, b] : {std::pair{-1.0, 2.0}, {0.0, 1.0}, {0.5, 4.0}, {1.0, 10.0}}) {
        CHECK(integration_by_parts_residual(m, alpha, a, b) <= 1e-6);
      }
    }
  }
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(TailModel::exact_weibull(1.0), DomainError);
  CHECK_THROWS_AS(TailModel::exact_weibull(0.0), DomainError);
  CHECK_THROWS_AS(TailModel::bounded_below_envelope(0.3, S::constant(1.0), S::constant(2.0),
                                                    S::constant(0.5), 10.0, 0.0),
                  InvariantViolation);
}

TEST_CASE("structured text round trip") {
  for (const auto& m : model_catalogue()) {
    const auto back = tail_model_from_text(to_text(m));
    CHECK(to_text(back) == to_text(m));
    for (double t : {-0.5, 0.0, 3.0, 40.0}) CHECK(back.survival(t) == m.survival(t));
  }
  CHECK_THROWS_AS(tail_model_from_text(R"({"r":0.5,"family":{"tag":"pareto"}})"), FormatError);
}

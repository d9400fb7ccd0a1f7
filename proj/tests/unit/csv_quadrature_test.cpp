#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ldptails/csv.hpp"
#include "ldptails/errors.hpp"
#include "ldptails/quadrature.hpp"

using namespace ldptails;

TEST_CASE("format_number round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("csv quoting") {
  CHECK(CsvWriter::quote("plain") == "plain");
  CHECK(CsvWriter::quote("a,b") == "\"a,b\"");
  CHECK(CsvWriter::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  std::ostringstream out;
  CsvWriter(out).header({"x", "y"}).row({"1", "a;b"});
  CHECK(out.str() == "x,y\n1,a;b\n");
}

TEST_CASE("integrate: finite, infinite and singular ranges") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0, 1e-12) == doctest::Approx(9.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, std::numeric_limits<double>::infinity(),
                  1e-10) == doctest::Approx(1.0).epsilon(1e-10));
  // endpoint singularity of the Weibull(1/2) density
  const auto f = [](double x) { return std::exp(-std::sqrt(x)) / (2.0 * std::sqrt(x)); };
  CHECK(integrate(f, 0.0, 4.0, 1e-10) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("integrate splits at breakpoints") {
  const auto kink = [](double x) { return std::abs(x - 0.3); };
  const std::vector<double> bp{0.3};
  CHECK(integrate(kink, 0.0, 1.0, 1e-12, bp) == doctest::Approx(0.045 + 0.245).epsilon(1e-13));
  const auto r = integrate_with_error(kink, 0.0, 1.0, bp);
  CHECK(r.error >= 0.0);
  CHECK(r.error < 1e-10);
}

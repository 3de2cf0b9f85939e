#include <cmath>

#include "doctest.h"
#include "tandem/numerics.hpp"
#include "tandem/random.hpp"

using namespace tandem;
using namespace tandem::numerics;

TEST_CASE("integrate handles smooth and endpoint-singular integrands") {
  CHECK(integrate([](double x) { return x * x * x; }, 0.0, 2.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 50.0) ==
        doctest::Approx(1.0 - std::exp(-50.0)).epsilon(1e-13));
  // 1/sqrt(x) has an integrable singularity at 0
  const double v = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(integrate([](double) { return 1.0; }, 3.0, 3.0) == 0.0);
}

TEST_CASE("integrate reports non-finite results") {
  CHECK_THROWS_AS(integrate([](double) { return NAN; }, 0.0, 1.0), NumericalError);
}

TEST_CASE("find_root brackets and refuses a bad interval") {
  const double r = find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, BracketTolerance{});
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, 0.0, 2.0, BracketTolerance{}),
                  NumericalError);
}

TEST_CASE("grids hit their endpoints exactly") {
  const auto g = log_space(1e-3, 1e6, 91);
  REQUIRE(g.size() == 91);
  CHECK(g.front() == 1e-3);
  CHECK(g.back() == 1e6);
  CHECK(g[30] == doctest::Approx(1.0).epsilon(1e-13));
  const auto l = lin_space(0.0, 1.0, 11);
  CHECK(l.back() == 1.0);
  CHECK(l[5] == doctest::Approx(0.5));
}

TEST_CASE("random streams are reproducible and distinct") {
  RandomStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("uniform draws stay inside the open unit interval") {
  RandomStream r(1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += r.exponential(2.0);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

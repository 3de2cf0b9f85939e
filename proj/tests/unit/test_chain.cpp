#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "tandem/chain.hpp"
#include "tandem/random.hpp"
#include "tandem/stats.hpp"
#include "tandem/tandemsim.hpp"

using namespace tandem;

namespace {
const ServiceDistribution kDist(1.5, 1.0);

double two_sample_tol(std::size_t a, std::size_t b) {
  return 1.95 * std::sqrt(static_cast<double>(a + b) / (static_cast<double>(a) * b));
}
}  // namespace

TEST_CASE("heavy-traffic schedule") {
  const auto s = schedule(kDist, 0.5, 1e4);
  CHECK(s.rho_n == doctest::Approx(0.995).epsilon(1e-14));
  CHECK(s.lambda == doctest::Approx(1.0 / 3.0));
  CHECK(s.lambda_n == doctest::Approx(0.995 / 3.0));
  CHECK(schedule(kDist, 0.0, 50.0).rho_n == 1.0);
  CHECK_THROWS(schedule(kDist, 0.5, 0.5));
  CHECK_THROWS(schedule(kDist, -0.1, 10.0));
  CHECK_THROWS(schedule(kDist, 1.0, 1.0));  // gamma n P(V > n) = 1
}

TEST_CASE("step counts") {
  CHECK(scaled_steps(1000.0, 1.0) == 1000);
  CHECK(scaled_steps(1e4, 0.3) == 3000);
  CHECK(scaled_steps(1000.0, 0.001) == 1);
  CHECK(scaled_steps(1000.0, 0.0) == 0);
  CHECK(scaled_steps(100.0, 0.0099) == 0);
  CHECK_THROWS(scaled_steps(100.0, -1.0));
}

TEST_CASE("burn-in defaults") {
  CHECK(default_burn_in(0.9) == 100000);
  CHECK(default_burn_in(0.99999) == doctest::Approx(1e6).epsilon(1e-6));
  CHECK_THROWS(default_burn_in(1.0));
}

TEST_CASE("one step is monotone in the starting point") {
  const auto s = schedule(kDist, 0.5, 100.0);
  const auto table = tabulate(s.lambda_n, kDist, chain_grid(s, 256));
  const auto sampler = tabulated_sampler(table);
  for (std::uint64_t r = 0; r < 200; ++r) {
    RandomStream a(5, r), b(5, r);
    const auto ya = step({0.2, 0}, kernel_of(s), sampler, a);
    const auto yb = step({0.9, 0}, kernel_of(s), sampler, b);
    CHECK(ya.value <= yb.value);
    CHECK(ya.step == 1);
  }
}

TEST_CASE("zero horizon returns the starting point") {
  const auto s = schedule(kDist, 0.5, 100.0);
  const auto table = tabulate(s.lambda_n, kDist, chain_grid(s, 256));
  EnsembleSpec e;
  e.t = 0.0;
  e.x0 = 0.7;
  e.reps = 10;
  for (double v : run_scaled(kernel_of(s), tabulated_sampler(table), e)) CHECK(v == 0.7);
  for (double v : run_representation(kernel_of(s), tabulated_sampler(table), e)) CHECK(v == 0.7);
  e.x0 = -1.0;
  CHECK_THROWS(run_scaled(kernel_of(s), tabulated_sampler(table), e));
}

TEST_CASE("sequential and max-representation ensembles agree in law") {
  const auto s = schedule(kDist, 0.5, 1000.0);
  const auto sampler = tabulated_sampler(tabulate(s.lambda_n, kDist, chain_grid(s)));
  EnsembleSpec e;
  e.reps = 4000;
  e.x0 = 0.5;
  e.seed = 17;
  const auto a = run_scaled(kernel_of(s), sampler, e);
  e.stream_offset = 1ull << 32;
  const auto b = run_representation(kernel_of(s), sampler, e);
  CHECK(ks_distance(EmpiricalDistribution(a), EmpiricalDistribution(b)) < two_sample_tol(4000, 4000));
}

TEST_CASE("ensembles do not depend on the thread count") {
  const auto s = schedule(kDist, 0.5, 300.0);
  const auto sampler = tabulated_sampler(tabulate(s.lambda_n, kDist, chain_grid(s, 256)));
  EnsembleSpec e;
  e.reps = 300;
  e.threads = 1;
  const auto a = run_scaled(kernel_of(s), sampler, e);
  e.threads = 3;
  CHECK(a == run_scaled(kernel_of(s), sampler, e));
}

TEST_CASE("chain kernel matches the queue: R_k / n against k chain steps") {
  const double n = 100.0;
  const auto s = schedule(kDist, 0.5, n);  // rho_n = 0.95
  REQUIRE(s.rho_n == doctest::Approx(0.95));
  const std::size_t reps = 4000, k = 100;
  std::vector<double> des(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream rng(123, r);
    des[r] = simulate(s.lambda_n, kDist, k, rng).busy_periods.back().r_value / n;
  }
  EnsembleSpec e;
  e.reps = reps;
  e.seed = 456;
  const auto chain = run_scaled(kernel_of(s), tabulated_sampler(tabulate(s.lambda_n, kDist, chain_grid(s))), e);
  CHECK(ks_distance(EmpiricalDistribution(des), EmpiricalDistribution(chain)) < two_sample_tol(reps, reps));
}

TEST_CASE("simulated busy-period sampler agrees with the tabulated one") {
  const auto s = schedule(kDist, 0.5, 30.0);
  const auto tab = tabulated_sampler(tabulate(s.lambda_n, kDist, chain_grid(s)));
  const auto sim = simulated_sampler(s.lambda_n, kDist);
  std::vector<double> a(5000), b(5000);
  RandomStream ra(1), rb(2);
  for (auto& v : a) v = tab(ra);
  for (auto& v : b) v = sim(rb);
  CHECK(ks_distance(EmpiricalDistribution(a), EmpiricalDistribution(b)) < two_sample_tol(5000, 5000));
}

TEST_CASE("mean-idle substitution barely moves the law at large n") {
  const auto s = schedule(kDist, 0.5, 1e4);
  const auto sampler = tabulated_sampler(tabulate(s.lambda_n, kDist, chain_grid(s)));
  EnsembleSpec e;
  e.reps = 1000;
  e.seed = 2;
  const auto a = run_scaled(kernel_of(s), sampler, e);
  const auto b = run_mean_idle(kernel_of(s), sampler, e);
  CHECK(ks_distance(EmpiricalDistribution(a), EmpiricalDistribution(b)) < 0.02);
}

TEST_CASE("centred idle sums flatten as n grows") {
  CHECK(idle_sum_flatness(schedule(kDist, 0.5, 100.0), 0.0, 10, 1) == 0.0);
  double prev = INFINITY;
  for (double n : {1e2, 1e3, 1e4}) {
    const double v = idle_sum_flatness(schedule(kDist, 0.5, n), 1.0, 200, 3);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS(idle_sum_flatness(schedule(kDist, 0.5, 100.0), 1.0, 0, 1));
}

TEST_CASE("scaled busy-period maximum probes") {
  const auto s = schedule(kDist, 0.5, 1e4);
  const std::vector<double> y{0.1, 1.0, 10.0};
  const auto p = scaled_max_cdf_probe(s, y);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(shifted_probe(s, y[i], 0.0) == doctest::Approx(p[i]).epsilon(1e-12));
    CHECK(std::fabs(shifted_probe(s, y[i], 5.0) / p[i] - 1.0) < 0.01);
  }
  CHECK(p[0] > p[1]);
  CHECK(p[1] > p[2]);
  CHECK_THROWS(shifted_probe(s, 0.0, 1.0));
}

TEST_CASE("long unscaled chain keeps its post-burn-in values") {
  const ServiceDistribution d(1.5, 1.0);
  const double lambda = 0.2;
  const auto sampler = tabulated_sampler(tabulate(lambda, d, GridSpec{1.0, 1e6, 512}));
  const auto v = run_long_chain(lambda, sampler, LongRunSpec{1000, 50, 9}, 0.6);
  CHECK(v.size() == 1000);
  CHECK(*std::min_element(v.begin(), v.end()) >= 1.0);
}

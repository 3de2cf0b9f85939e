#include "tandem/limits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tandem/numerics.hpp"
#include "tandem/parallel.hpp"

namespace tandem {

namespace {

// Integral of f over [a, b], split at the breakpoints that fall inside.
template <class F>
double integrate_pieces(F&& f, double a, double b, std::vector<double> breaks, double rel_tol) {
  if (!(b > a)) return 0.0;
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  double lo = a;
  for (double p : breaks) {
    if (p <= lo) continue;
    if (p > b) break;
    total += numerics::integrate(f, lo, p, rel_tol);
    lo = p;
  }
  return total;
}

}  // namespace

TestFunction TestFunction::bump(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("bump: c must be > 0");
  const double c4 = c * c * c * c;
  SmoothFunction fn;
  fn.support = c;
  fn.value = [c, c4](double x) {
    if (x <= 0.0 || x >= c) return 0.0;
    const double d = x * (x - c);
    return d * d / c4;
  };
  fn.derivative = [c, c4](double x) {
    if (x <= 0.0 || x >= c) return 0.0;
    return 2.0 * x * (x - c) * (2.0 * x - c) / c4;
  };
  return TestFunction(std::move(fn), 2.0 / (c * c), "bump(c=" + std::to_string(c) + ")");
}

TestFunction TestFunction::zero(double c) {
  SmoothFunction fn;
  fn.support = c;
  fn.value = [](double) { return 0.0; };
  fn.derivative = [](double) { return 0.0; };
  return TestFunction(std::move(fn), 0.0, "zero");
}

double TestFunction::measured_slope_bound(std::size_t points) const {
  double worst = 0.0;
  const double c = support();
  for (std::size_t i = 1; i < points; ++i) {
    const double x = c * static_cast<double>(i) / static_cast<double>(points);
    worst = std::max(worst, std::fabs(derivative(x)) / x);
  }
  return worst;
}

double semigroup_apply(const LimitCdf& cdf, double t, const SmoothFunction& g, double x,
                       double rel_tol) {
  if (!(t >= 0.0)) throw std::domain_error("semigroup_apply: t must be >= 0");
  if (!(x >= 0.0)) throw std::domain_error("semigroup_apply: x must be >= 0");
  if (t == 0.0) return g.value(x);
  const double a = std::max(x - t / cdf.lambda(), 0.0);
  if (a >= g.support) return g.value(a);
  auto integrand = [&](double y) { return g.derivative(y) * cdf.phi_complement(t, y); };
  return g.value(a) + integrate_pieces(integrand, a, g.support, g.kinks, rel_tol);
}

double semigroup_apply(const LimitCdf& cdf, double t, const TestFunction& f, double x) {
  return semigroup_apply(cdf, t, f.smooth(), x);
}

SmoothFunction semigroup_image(const LimitCdf& cdf, double t, const SmoothFunction& f) {
  const double shift = t / cdf.lambda();
  SmoothFunction g;
  g.support = f.support + shift;
  g.kinks.push_back(shift);
  for (double k : f.kinks) g.kinks.push_back(k + shift);
  g.value = [&cdf, t, f](double x) { return semigroup_apply(cdf, t, f, x); };
  g.derivative = [&cdf, t, f, shift](double x) {
    if (x <= shift) return 0.0;
    return f.derivative(x - shift) * cdf.phi(t, x - shift);
  };
  return g;
}

double semigroup_property(const LimitCdf& cdf, double s, double t, const TestFunction& f,
                          const std::vector<double>& x_grid) {
  const SmoothFunction inner = semigroup_image(cdf, t, f.smooth());
  double worst = 0.0;
  for (double x : x_grid) {
    const double nested = semigroup_apply(cdf, s, inner, x);
    const double direct = semigroup_apply(cdf, s + t, f.smooth(), x);
    worst = std::max(worst, std::fabs(nested - direct));
  }
  return worst;
}

MeanEstimate semigroup_monte_carlo(const LimitCdf& cdf, double t, const TestFunction& f, double x,
                                   std::size_t draws, std::uint64_t seed) {
  if (draws < 2) throw std::invalid_argument("semigroup_monte_carlo: need >= 2 draws");
  RandomStream rng(seed, 0);
  const double shift = t / cdf.lambda();
  std::vector<double> values(draws);
  for (auto& v : values) {
    const double z = t > 0.0 ? cdf.sample_z(t, rng) : 0.0;
    v = f(std::max(x - shift, z));
  }
  return mean_estimate(values);
}

double generator_apply(const KappaFunction& kappa, const TestFunction& f, double x) {
  const double c = f.support();
  if (x >= c) return 0.0;
  const double lo = std::max(x, 0.0);
  const double drift = -f.derivative(lo) / kappa.params().lambda;
  const double jumps = numerics::integrate(
      [&](double y) { return f.derivative(y) * kappa.value(y) / y; }, lo, c, 1e-13);
  return drift + jumps;
}

GeneratorCheck generator_limit_check(const LimitCdf& cdf, const TestFunction& f,
                                     const std::vector<double>& x_grid,
                                     const std::vector<double>& h_grid, double floor) {
  if (h_grid.size() < 2) throw std::invalid_argument("generator check: need >= 2 step sizes");
  for (std::size_t i = 1; i < h_grid.size(); ++i) {
    if (!(h_grid[i] < h_grid[i - 1]) || !(h_grid[i] > 0.0)) {
      throw std::invalid_argument("generator check: h grid must be positive and decreasing");
    }
  }
  GeneratorCheck check;
  for (double x : x_grid) {
    const double gen = generator_apply(cdf.kappa(), f, x);
    const double fx = f(x);
    std::vector<double> errors;
    for (double h : h_grid) {
      const double dq = (semigroup_apply(cdf, h, f, x) - fx) / h;
      const double err = std::fabs(dq - gen);
      errors.push_back(err);
      check.rows.push_back({x, h, dq, gen, err});
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
      if (errors[i] > floor && !(errors[i] < errors[i - 1])) check.decreasing = false;
    }
    // Observed order on the finest pair. At x = 0 the error behaves like
    // h log(1/h), so the local order creeps up to 1 from below.
    const std::size_t k = errors.size() - 1;
    double order = INFINITY;
    if (errors[k] > floor) {
      order = std::log(errors[k - 1] / errors[k]) / std::log(h_grid[k - 1] / h_grid[k]);
    }
    check.orders.push_back({x, order});
    check.min_order = std::min(check.min_order, order);
    if (!(order >= check.required_order)) check.first_order = false;
  }
  return check;
}

double discrete_generator(const HeavyTrafficSchedule& s, const TestFunction& f, double x,
                          double rel_tol) {
  if (!(x >= 0.0)) throw std::domain_error("discrete_generator: x must be >= 0");
  const double n = s.n;
  const double b = s.dist.scale();
  const double c = f.support();
  const double lam = s.lambda_n;

  // Upward part: jumps to M/n above x.
  double up = 0.0;
  if (x < c) {
    auto g = [&](double y) {
      return f.derivative(y) * n * solve_mbar_at(lam, s.dist, n * y);
    };
    up = integrate_pieces(g, x, c, {b / n}, rel_tol);
  }

  // Downward part: drift by the idle time, cut off where M/n takes over.
  double down = 0.0;
  const double z_lo = std::max(0.0, n * (x - c));
  const double z_hi = std::min(n * x - b, z_lo + 60.0 / lam);
  if (z_hi > z_lo) {
    auto g = [&](double z) {
      return f.derivative(x - z / n) * std::exp(-lam * z) * solve_m_at(lam, s.dist, n * x - z);
    };
    std::vector<double> breaks;
    if (n * (x - c) > 0.0) breaks.push_back(n * (x - c));
    down = integrate_pieces(g, z_lo, z_hi, breaks, rel_tol);
  }
  return up - down;
}

MeanEstimate discrete_generator_monte_carlo(const HeavyTrafficSchedule& s,
                                            const MaxSampler& sampler, const TestFunction& f,
                                            double x, std::size_t draws, std::uint64_t seed,
                                            unsigned threads) {
  if (draws < 2) throw std::invalid_argument("discrete generator MC: need >= 2 draws");
  constexpr std::size_t kChunk = 1 << 16;
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks, 0.0);
  std::vector<double> squares(chunks, 0.0);
  const double fx = f(x);
  parallel_for(chunks, threads, [&](std::size_t k) {
    RandomStream rng(seed, k);
    const std::size_t begin = k * kChunk;
    const std::size_t end = std::min(draws, begin + kChunk);
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double idle = rng.exponential(s.lambda_n);
      const double m = sampler(rng);
      const double v = s.n * (f(std::max(x - idle / s.n, m / s.n)) - fx);
      sum += v;
      sq += v * v;
    }
    sums[k] = sum;
    squares[k] = sq;
  });
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < chunks; ++k) {
    sum += sums[k];
    sq += squares[k];
  }
  const double count = static_cast<double>(draws);
  const double mean = sum / count;
  const double var = std::max(0.0, (sq - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(var / count)};
}

TwoSampleReport iterate_representation_check(const HeavyTrafficSchedule& s,
                                             const MaxSampler& sampler, const TestFunction& f,
                                             double x, double t, std::size_t reps,
                                             std::uint64_t seed, unsigned threads) {
  EnsembleSpec spec;
  spec.t = t;
  spec.x0 = x;
  spec.reps = reps;
  spec.seed = seed;
  spec.threads = threads;
  const ChainKernel kernel = kernel_of(s);
  const auto sequential = run_scaled(kernel, sampler, spec);
  spec.stream_offset = std::uint64_t{1} << 40;
  const auto closed_form = run_representation(kernel, sampler, spec);

  TwoSampleReport report;
  report.size_a = sequential.size();
  report.size_b = closed_form.size();
  report.ks = ks_distance(EmpiricalDistribution(sequential), EmpiricalDistribution(closed_form));
  std::vector<double> fa(sequential.size());
  std::vector<double> fb(closed_form.size());
  std::transform(sequential.begin(), sequential.end(), fa.begin(), [&](double v) { return f(v); });
  std::transform(closed_form.begin(), closed_form.end(), fb.begin(), [&](double v) { return f(v); });
  report.mean_a = mean_estimate(fa);
  report.mean_b = mean_estimate(fb);
  const double se = std::hypot(report.mean_a.std_error, report.mean_b.std_error);
  const double diff = std::fabs(report.mean_a.mean - report.mean_b.mean);
  report.mean_z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
  return report;
}

MaxConvolutionReport max_convolution_check(const LimitCdf& cdf, const std::vector<double>& s_grid,
                                           const std::vector<double>& t_grid,
                                           const std::vector<double>& x_grid, double s_mc,
                                           double t_mc, std::size_t draws, std::uint64_t seed) {
  MaxConvolutionReport report;
  const double lam = cdf.lambda();
  for (double s : s_grid) {
    for (double t : t_grid) {
      for (double x : x_grid) {
        const double lhs = cdf.phi(t, x + s / lam) * cdf.phi(s, x);
        const double rhs = cdf.phi(s + t, x);
        report.identity_error = std::max(report.identity_error, std::fabs(lhs - rhs));
        ++report.identity_points;
      }
    }
  }
  if (draws > 0) {
    if (!(s_mc > 0.0 && t_mc > 0.0)) {
      throw std::invalid_argument("max convolution: Monte Carlo times must be > 0");
    }
    RandomStream pair_rng(seed, 0);
    RandomStream sum_rng(seed, 1);
    std::vector<double> combined(draws);
    std::vector<double> direct(draws);
    for (std::size_t i = 0; i < draws; ++i) {
      const double zt = cdf.sample_z(t_mc, pair_rng);
      const double zs = cdf.sample_z(s_mc, pair_rng);
      combined[i] = std::max(zt - s_mc / lam, zs);
      direct[i] = cdf.sample_z(s_mc + t_mc, sum_rng);
    }
    report.ks = ks_distance(EmpiricalDistribution(combined), EmpiricalDistribution(direct));
    report.draws = draws;
  }
  return report;
}

}  // namespace tandem

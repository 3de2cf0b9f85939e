// The limit semigroup T(t)f(x) = E f(max(x - t/lambda, Z_t)), its generator
//     A f(x) = -f'(x)/lambda + int_x^inf f'(y) kappa(y)/y dy,
// the discrete generators A_n = n (T_n - I) of the scaled chains, and the
// consistency checks between them.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tandem/boxma.hpp"
#include "tandem/chain.hpp"
#include "tandem/kappa.hpp"
#include "tandem/stats.hpp"

namespace tandem {

/// A C^1 function on [0, inf) that vanishes from `support` on. `kinks` lists
/// points where the derivative is not smooth (quadrature breakpoints).
struct SmoothFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double support = 0.0;
  std::vector<double> kinks;
};

/// Members of the core: compact support on [0, c] and |f'(x)| <= a x.
class TestFunction {
 public:
  /// x^2 (x - c)^2 / c^4 on [0, c]; a = 2 / c^2.
  static TestFunction bump(double c);
  static TestFunction zero(double c = 1.0);

  double operator()(double x) const { return fn_.value(x); }
  double derivative(double x) const { return fn_.derivative(x); }
  double support() const { return fn_.support; }
  double slope_bound() const { return a_; }
  const SmoothFunction& smooth() const { return fn_; }
  const std::string& name() const { return name_; }

  /// max over a dense grid of |f'(x)| / x, to certify the stated bound.
  double measured_slope_bound(std::size_t points = 20001) const;

 private:
  TestFunction(SmoothFunction fn, double a, std::string name)
      : fn_(std::move(fn)), a_(a), name_(std::move(name)) {}
  SmoothFunction fn_;
  double a_;
  std::string name_;
};

/// Tolerances shared by the checks below.
struct LimitTolerances {
  double quadrature_rel = 1e-12;
  double semigroup_abs = 1e-8;
  double semigroup_property = 1e-6;
  double generator_abs = 1e-9;
  double discrete_generator_abs = 1e-6;
  double max_convolution_identity = 1e-8;
  double max_convolution_ks = 0.01;
  double iterate_ks = 0.02;
};

/// T(t)g(x) = g(a) + int_a^support g'(y) (1 - Phi(t, y)) dy, a = [x - t/lambda]^+.
double semigroup_apply(const LimitCdf& cdf, double t, const SmoothFunction& g, double x,
                       double rel_tol = 1e-12);
double semigroup_apply(const LimitCdf& cdf, double t, const TestFunction& f, double x);

/// T(t)f as a SmoothFunction, with (T(t)f)'(x) = f'(x - t/lambda) Phi(t, x - t/lambda).
/// The result refers to `cdf`, which must outlive it.
SmoothFunction semigroup_image(const LimitCdf& cdf, double t, const SmoothFunction& f);

/// max over x_grid of |T(s) T(t) f(x) - T(s + t) f(x)|.
double semigroup_property(const LimitCdf& cdf, double s, double t, const TestFunction& f,
                          const std::vector<double>& x_grid);

/// Monte Carlo estimate of T(t)f(x) from sample_z.
MeanEstimate semigroup_monte_carlo(const LimitCdf& cdf, double t, const TestFunction& f, double x,
                                   std::size_t draws, std::uint64_t seed);

double generator_apply(const KappaFunction& kappa, const TestFunction& f, double x);

struct GeneratorRow {
  double x = 0.0;
  double h = 0.0;
  double difference_quotient = 0.0;
  double generator = 0.0;
  double error = 0.0;
};

struct GeneratorCheck {
  std::vector<GeneratorRow> rows;
  std::vector<std::pair<double, double>> orders;  // (x, observed order on the finest pair)
  double min_order = INFINITY;
  double required_order = 0.5;
  bool decreasing = true;   // e(h) decreases with h at every x
  bool first_order = true;  // observed order >= required_order at every x
  bool ok() const { return decreasing && first_order; }
};

/// (T(h)f(x) - f(x)) / h against A f(x). Errors below `floor` count as zero.
GeneratorCheck generator_limit_check(const LimitCdf& cdf, const TestFunction& f,
                                     const std::vector<double>& x_grid,
                                     const std::vector<double>& h_grid, double floor = 1e-12);

/// A_n f(x) = n (E f(max(x - I/n, M/n)) - f(x)), I ~ Exp(lambda_n), M from the
/// busy-period-maximum law at lambda_n. Integrating by parts,
///   A_n f(x) = int_x^c f'(y) n mbar(n y) dy - int_0^{n x} f'(x - z/n) e^{-lambda_n z} m(n x - z) dz,
/// with m solved exactly at every node.
double discrete_generator(const HeavyTrafficSchedule& s, const TestFunction& f, double x,
                          double rel_tol = 1e-10);

/// Monte Carlo A_n f(x) with the tabulated sampler; returns mean and standard error.
MeanEstimate discrete_generator_monte_carlo(const HeavyTrafficSchedule& s,
                                            const MaxSampler& sampler, const TestFunction& f,
                                            double x, std::size_t draws, std::uint64_t seed,
                                            unsigned threads = 1);

struct TwoSampleReport {
  double ks = 0.0;
  MeanEstimate mean_a;
  MeanEstimate mean_b;
  double mean_z = 0.0;  // |mean_a - mean_b| / combined standard error
  std::size_t size_a = 0;
  std::size_t size_b = 0;
};

/// Sequential kernel application against the closed-form max representation,
/// each from its own family of streams; f applied to both terminal samples.
TwoSampleReport iterate_representation_check(const HeavyTrafficSchedule& s,
                                             const MaxSampler& sampler, const TestFunction& f,
                                             double x, double t, std::size_t reps,
                                             std::uint64_t seed, unsigned threads = 1);

struct MaxConvolutionReport {
  double identity_error = 0.0;  // max |Phi(t, x + s/lambda) Phi(s, x) - Phi(s + t, x)|
  std::size_t identity_points = 0;
  double ks = 0.0;              // max(Z_t - s/lambda, Z_s) against Z_{s+t}
  std::size_t draws = 0;
};

MaxConvolutionReport max_convolution_check(const LimitCdf& cdf, const std::vector<double>& s_grid,
                                           const std::vector<double>& t_grid,
                                           const std::vector<double>& x_grid, double s_mc,
                                           double t_mc, std::size_t draws, std::uint64_t seed);

}  // namespace tandem

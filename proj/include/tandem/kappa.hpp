// The heavy-traffic limit function kappa(y) and the limit law Phi(t, x).
//
// With C = -1/Gamma(1 - nu) and T ~ Pareto(nu) on [1, inf), kappa(y) is the
// unique positive root of
//
//     H(k) = C E[exp(-lambda k T)] - k gamma y^(nu-1) C - (lambda k)^nu = 0,
//
// and for t >= 0, x > 0
//
//     Phi(t, x) = exp(-lambda int_x^{x + t/lambda} kappa(y)/y dy).
#pragma once

#include <cstddef>
#include <vector>

#include "tandem/heavytail.hpp"
#include "tandem/random.hpp"

namespace tandem {

struct KappaParams {
  double lambda = 1.0;  // limit arrival rate, 1 / E[V]
  double nu = 1.5;
  double gamma = 0.0;

  /// Throws std::invalid_argument / std::domain_error on bad values.
  void validate() const;
  /// lambda = 1 / E[V] for the given service law.
  static KappaParams from_service(const ServiceDistribution& dist, double gamma);
};

/// H(k) at a given y.
double kappa_equation(const KappaParams& p, double y, double k);
/// dH/dk at a given y.
double kappa_equation_slope(const KappaParams& p, double y, double k);

/// (1/lambda) C^(1/nu), an upper bound for kappa at every y.
double kappa_upper_bound(const KappaParams& p);

/// The unique positive root of H at y > 0.
double solve_kappa(const KappaParams& p, double y);

/// d log kappa / d log y at (y, kappa(y)), from the implicit function theorem.
double kappa_log_slope(const KappaParams& p, double y, double k);

struct KappaCacheSpec {
  double y_min = 1e-12;
  double y_max = 1e6;
  std::size_t points = 2048;
};

/// kappa tabulated on a log grid with cubic Hermite interpolation of
/// log kappa in log y, using the exact slopes at the nodes. Point queries
/// off the grid are solved fresh. Integrals beyond the grid use the
/// asymptotic forms
///   y -> 0:   kappa(y) - kappa(0) ~ c y^(nu-1)
///   y -> inf: kappa(y) ~ 1 / (gamma y^(nu-1) + B)     (gamma > 0)
class KappaFunction {
 public:
  explicit KappaFunction(const KappaParams& params, const KappaCacheSpec& spec = {},
                         unsigned threads = 1);

  const KappaParams& params() const { return params_; }
  const std::vector<double>& grid() const { return y_; }
  const std::vector<double>& values() const { return kappa_; }
  const std::vector<double>& residuals() const { return residual_; }
  double max_abs_residual() const;

  /// kappa at y = 0+, the gamma = 0 constant.
  double at_zero() const { return kappa0_; }
  bool constant() const { return params_.gamma == 0.0; }

  double operator()(double y) const { return value(y); }
  double value(double y) const;

  /// int_a^b kappa(y)/y dy for 0 < a <= b; b may be +inf when gamma > 0.
  double log_integral(double a, double b) const;

 private:
  double cumulative(double u) const;  // int_{log y_min}^{u} kappa(e^v) dv
  double interpolate_log(std::size_t cell, double u) const;
  double upper_tail(double u) const;  // int_{e^u}^inf of the large-y form

  KappaParams params_;
  double kappa0_ = 0.0;
  std::vector<double> y_;
  std::vector<double> kappa_;
  std::vector<double> residual_;
  std::vector<double> u_;       // log y
  std::vector<double> lk_;      // log kappa
  std::vector<double> slope_;   // d log kappa / d log y
  std::vector<double> cum_;     // cumulative(u_i)
  double tail_offset_ = 0.0;    // B of the large-y form
  double tail_above_ = 0.0;     // int_{y_max}^inf kappa/y
};

struct PhiInfinity {
  double value = 0.0;
  bool degenerate = false;  // gamma = 0: the integral diverges and the value is 0
};

class LimitCdf {
 public:
  explicit LimitCdf(KappaFunction kappa) : kappa_(std::move(kappa)) {}

  const KappaFunction& kappa() const { return kappa_; }
  double lambda() const { return kappa_.params().lambda; }

  double phi(double t, double x) const;
  /// 1 - Phi(t, x) without cancellation.
  double phi_complement(double t, double x) const;
  /// Same quantity by adaptive quadrature of kappa(y)/y in log y.
  double phi_by_quadrature(double t, double x) const;
  /// d Phi(t, x) / dx.
  double density(double t, double x) const;
  PhiInfinity phi_infinity(double x) const;

  /// x with Phi(t, x) = u, for t > 0 and u in (0, 1).
  double quantile(double t, double u) const;
  double sample_z(double t, RandomStream& rng) const { return quantile(t, rng.uniform()); }

 private:
  KappaFunction kappa_;
};

/// Least-squares slope of log kappa against log y on a log grid over
/// [y_lo, y_hi]. Requires gamma > 0 and y_hi / y_lo >= 100.
double regular_variation_exponent(const KappaFunction& kappa, double y_lo, double y_hi,
                                  std::size_t points = 64);

}  // namespace tandem

// Regularly varying service-time laws.
//
// The concrete family is Pareto(nu, b): P(V > t) = (b/t)^nu for t >= b, with
// tail index 1 < nu < 2 so the mean is finite and the variance is not. The
// slowly varying factor is therefore constant, which keeps every tail, moment
// and transform closed-form.
#pragma once

#include <string>

#include "tandem/random.hpp"

namespace tandem {

enum class ServiceFamily { Pareto };

std::string to_string(ServiceFamily family);

/// Tail indices are accepted on [1 + kNuMargin, 2 - kNuMargin].
inline constexpr double kNuMargin = 1e-3;

/// Throws std::domain_error unless nu lies inside the accepted tail-index range.
void check_tail_index(double nu);

class ServiceDistribution {
 public:
  ServiceDistribution(double nu, double scale = 1.0, ServiceFamily family = ServiceFamily::Pareto);

  double nu() const { return nu_; }
  double scale() const { return scale_; }
  ServiceFamily family() const { return family_; }

  /// P(V > t); equal to 1 below the lower endpoint of the support.
  double tail(double t) const;
  double cdf(double t) const { return 1.0 - tail(t); }
  double density(double t) const;
  double mean() const;

  /// Integral of t^order dF(t) over [0, w], order 1 or 2.
  double truncated_moment(double w, int order) const;

  /// Inverse of the tail: the t with tail(t) = u, for u in (0, 1].
  double tail_quantile(double u) const;
  double sample(RandomStream& rng) const { return tail_quantile(rng.uniform()); }

 private:
  double nu_;
  double scale_;
  ServiceFamily family_;
};

/// Gamma(1 - nu) for nu in (1, 2), through the reflection identity
/// Gamma(1 - nu) Gamma(nu) = pi / sin(pi nu). Negative on that range.
double gamma_one_minus(double nu);

/// The regular-variation constant C_nu = -1 / Gamma(1 - nu) > 0.
double tail_constant(double nu);

/// E[exp(-s T)] for T ~ Pareto(nu) with unit lower endpoint, s >= 0.
/// Absolute accuracy better than 1e-10.
double pareto_laplace(double s, double nu);

/// d/ds of pareto_laplace: -E[T exp(-s T)].
double pareto_laplace_derivative(double s, double nu);

}  // namespace tandem

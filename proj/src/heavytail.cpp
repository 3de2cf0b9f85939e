#include "tandem/heavytail.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tandem/numerics.hpp"

namespace tandem {

std::string to_string(ServiceFamily family) {
  switch (family) {
    case ServiceFamily::Pareto:
      return "pareto";
  }
  return "unknown";
}

void check_tail_index(double nu) {
  if (!(nu >= 1.0 + kNuMargin && nu <= 2.0 - kNuMargin)) {
    throw std::domain_error("tail index nu=" + std::to_string(nu) + " outside [" +
                            std::to_string(1.0 + kNuMargin) + ", " +
                            std::to_string(2.0 - kNuMargin) + "]");
  }
}

ServiceDistribution::ServiceDistribution(double nu, double scale, ServiceFamily family)
    : nu_(nu), scale_(scale), family_(family) {
  check_tail_index(nu);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::domain_error("service scale b must be finite and > 0");
  }
}

double ServiceDistribution::tail(double t) const {
  if (t <= scale_) return 1.0;
  return std::pow(scale_ / t, nu_);
}

double ServiceDistribution::density(double t) const {
  if (t < scale_) return 0.0;
  return nu_ / scale_ * std::pow(scale_ / t, nu_ + 1.0);
}

double ServiceDistribution::mean() const { return nu_ * scale_ / (nu_ - 1.0); }

double ServiceDistribution::truncated_moment(double w, int order) const {
  if (order != 1 && order != 2) {
    throw std::domain_error("truncated_moment: order must be 1 or 2, got " +
                            std::to_string(order));
  }
  if (w <= scale_) return 0.0;
  if (order == 1) {
    return nu_ * scale_ / (nu_ - 1.0) * -std::expm1((nu_ - 1.0) * std::log(scale_ / w));
  }
  return nu_ * scale_ * scale_ / (2.0 - nu_) * std::expm1((2.0 - nu_) * std::log(w / scale_));
}

double ServiceDistribution::tail_quantile(double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("tail_quantile: u must lie in (0, 1]");
  return scale_ * std::pow(u, -1.0 / nu_);
}

double gamma_one_minus(double nu) {
  if (!(nu > 1.0 && nu < 2.0)) {
    throw std::domain_error("gamma_one_minus: nu must lie in (1, 2)");
  }
  return std::numbers::pi / (std::sin(std::numbers::pi * nu) * std::tgamma(nu));
}

double tail_constant(double nu) { return -1.0 / gamma_one_minus(nu); }

namespace {

// Truncation point for integrals of exp(-rate*u - s*e^u) over u >= 0 so the
// neglected remainder is below exp(-budget).
double truncation_point(double rate, double s, double budget) {
  double upper = budget / rate;
  if (s > 0.0) upper = std::min(upper, std::log1p(budget / s));
  return upper;
}

template <class F>
double integrate_split(F&& f, double s, double upper) {
  // The integrand switches from power-law to super-exponential decay near
  // u = -log(s); splitting there keeps both pieces smooth.
  const double knee = s > 0.0 ? -std::log(s) : upper;
  if (knee > 0.0 && knee < upper) {
    return numerics::integrate(f, 0.0, knee, 1e-13) + numerics::integrate(f, knee, upper, 1e-13);
  }
  return numerics::integrate(f, 0.0, upper, 1e-13);
}

}  // namespace

double pareto_laplace(double s, double nu) {
  if (!(s >= 0.0)) throw std::domain_error("pareto_laplace: s must be >= 0");
  if (s == 0.0) return 1.0;
  // Substituting x = e^u: nu * int_0^inf exp(-s e^u - nu u) du.
  const double upper = truncation_point(nu, s, 40.0);
  auto f = [s, nu](double u) { return std::exp(-s * std::exp(u) - nu * u); };
  return nu * integrate_split(f, s, upper);
}

double pareto_laplace_derivative(double s, double nu) {
  if (!(s >= 0.0)) throw std::domain_error("pareto_laplace_derivative: s must be >= 0");
  if (s == 0.0) return -nu / (nu - 1.0);
  const double upper = truncation_point(nu - 1.0, s, 40.0 + std::log(nu / (nu - 1.0)));
  auto f = [s, nu](double u) { return std::exp(-s * std::exp(u) + (1.0 - nu) * u); };
  return -nu * integrate_split(f, s, upper);
}

}  // namespace tandem

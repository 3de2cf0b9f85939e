#include "tandem/kappa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tandem/numerics.hpp"
#include "tandem/parallel.hpp"

namespace tandem {

namespace {

constexpr double kBracketFloor = 1e-14;

}  // namespace

void KappaParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("kappa: lambda must be finite and > 0");
  }
  check_tail_index(nu);
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("kappa: gamma must be finite and >= 0");
  }
}

KappaParams KappaParams::from_service(const ServiceDistribution& dist, double gamma) {
  KappaParams p{1.0 / dist.mean(), dist.nu(), gamma};
  p.validate();
  return p;
}

double kappa_equation(const KappaParams& p, double y, double k) {
  const double c = tail_constant(p.nu);
  const double drift = p.gamma == 0.0 ? 0.0 : k * p.gamma * std::pow(y, p.nu - 1.0) * c;
  return c * pareto_laplace(p.lambda * k, p.nu) - drift - std::pow(p.lambda * k, p.nu);
}

double kappa_equation_slope(const KappaParams& p, double y, double k) {
  const double c = tail_constant(p.nu);
  const double drift = p.gamma == 0.0 ? 0.0 : p.gamma * std::pow(y, p.nu - 1.0) * c;
  return c * p.lambda * pareto_laplace_derivative(p.lambda * k, p.nu) - drift -
         p.nu * std::pow(p.lambda, p.nu) * std::pow(k, p.nu - 1.0);
}

double kappa_upper_bound(const KappaParams& p) {
  p.validate();
  return std::pow(tail_constant(p.nu), 1.0 / p.nu) / p.lambda;
}

double solve_kappa(const KappaParams& p, double y) {
  const double hi = kappa_upper_bound(p);
  if (!(y > 0.0)) throw std::invalid_argument("solve_kappa: y must be > 0");
  auto h = [&](double k) { return kappa_equation(p, y, k); };
  return numerics::find_root(h, kBracketFloor, hi, {0.0, 1e-15}, 300);
}

double kappa_log_slope(const KappaParams& p, double y, double k) {
  if (p.gamma == 0.0) return 0.0;
  const double c = tail_constant(p.nu);
  return p.gamma * (p.nu - 1.0) * std::pow(y, p.nu - 1.0) * c / kappa_equation_slope(p, y, k);
}

KappaFunction::KappaFunction(const KappaParams& params, const KappaCacheSpec& spec,
                             unsigned threads)
    : params_(params) {
  params_.validate();
  if (!(spec.y_min > 0.0 && spec.y_max > spec.y_min) || spec.points < 2) {
    throw std::invalid_argument("kappa cache: need 0 < y_min < y_max and at least 2 points");
  }
  KappaParams flat = params_;
  flat.gamma = 0.0;
  kappa0_ = solve_kappa(flat, 1.0);

  y_ = numerics::log_space(spec.y_min, spec.y_max, spec.points);
  const std::size_t g = y_.size();
  kappa_.assign(g, kappa0_);
  residual_.assign(g, 0.0);
  slope_.assign(g, 0.0);
  parallel_for(g, threads, [&](std::size_t i) {
    if (!constant()) {
      kappa_[i] = solve_kappa(params_, y_[i]);
      slope_[i] = kappa_log_slope(params_, y_[i], kappa_[i]);
    }
    residual_[i] = kappa_equation(params_, y_[i], kappa_[i]);
  });
  for (std::size_t i = 1; i < g; ++i) {
    if (kappa_[i] > kappa_[i - 1]) {
      throw NumericalError("kappa cache: kappa increases near y=" + std::to_string(y_[i]));
    }
  }
  u_.resize(g);
  lk_.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    u_[i] = std::log(y_[i]);
    lk_[i] = std::log(kappa_[i]);
  }
  cum_.assign(g, 0.0);
  for (std::size_t i = 0; i + 1 < g; ++i) {
    cum_[i + 1] = cum_[i] + numerics::integrate_fixed(
                                [&](double u) { return std::exp(interpolate_log(i, u)); }, u_[i],
                                u_[i + 1]);
  }
  if (!constant()) {
    // kappa(y) ~ 1 / (gamma y^(nu-1) + B) for large y; B matches the last node.
    tail_offset_ = 1.0 / kappa_.back() - params_.gamma * std::pow(y_.back(), params_.nu - 1.0);
    tail_above_ = upper_tail(u_.back());
  }
}

double KappaFunction::upper_tail(double u) const {
  // int_{e^u}^inf dy / (y (A y^(nu-1) + B)) = log1p(B / (A z)) / ((nu-1) B), z = e^{(nu-1)u}
  const double nu = params_.nu;
  const double az = params_.gamma * std::exp((nu - 1.0) * u);
  const double b = tail_offset_;
  if (b == 0.0) return 1.0 / ((nu - 1.0) * az);
  return std::log1p(b / az) / ((nu - 1.0) * b);
}

double KappaFunction::max_abs_residual() const {
  double worst = 0.0;
  for (double r : residual_) worst = std::max(worst, std::fabs(r));
  return worst;
}

double KappaFunction::interpolate_log(std::size_t i, double u) const {
  const double h = u_[i + 1] - u_[i];
  const double s = (u - u_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * lk_[i] + h10 * h * slope_[i] + h01 * lk_[i + 1] + h11 * h * slope_[i + 1];
}

double KappaFunction::value(double y) const {
  if (!(y > 0.0)) throw std::domain_error("kappa: y must be > 0");
  if (constant()) return kappa0_;
  if (y < y_.front() || y > y_.back()) return solve_kappa(params_, y);
  const double u = std::log(y);
  const auto it = std::upper_bound(u_.begin(), u_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - u_.begin()) - 1;
  return std::exp(interpolate_log(i, u));
}

double KappaFunction::cumulative(double u) const {
  const double nu = params_.nu;
  if (u <= u_.front()) {
    const double r = u - u_.front();  // log(y / y_min) <= 0
    const double d = kappa_.front() - kappa0_;
    return kappa0_ * r + d / (nu - 1.0) * std::expm1((nu - 1.0) * r);
  }
  if (u >= u_.back()) return cum_.back() + tail_above_ - upper_tail(u);
  const auto it = std::upper_bound(u_.begin(), u_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - u_.begin()) - 1;
  return cum_[i] +
         numerics::integrate_fixed([&](double v) { return std::exp(interpolate_log(i, v)); },
                                   u_[i], u);
}

double KappaFunction::log_integral(double a, double b) const {
  if (!(a > 0.0) || !(b >= a)) {
    throw std::domain_error("kappa: log_integral needs 0 < a <= b");
  }
  if (a == b) return 0.0;
  if (constant()) {
    if (std::isinf(b)) return INFINITY;
    return kappa0_ * std::log1p((b - a) / a);
  }
  if (std::isinf(b)) {
    const double u = std::log(a);
    if (u >= u_.back()) return upper_tail(u);
    return cum_.back() + tail_above_ - cumulative(u);
  }
  return cumulative(std::log(b)) - cumulative(std::log(a));
}

double LimitCdf::phi(double t, double x) const {
  if (!(t >= 0.0)) throw std::domain_error("phi: t must be >= 0");
  if (x < 0.0) return 0.0;
  if (t == 0.0) return 1.0;
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double lam = lambda();
  if (kappa_.constant()) {
    return std::exp(-lam * kappa_.at_zero() * std::log1p(t / (x * lam)));
  }
  return std::exp(-lam * kappa_.log_integral(x, x + t / lam));
}

double LimitCdf::phi_complement(double t, double x) const {
  if (!(t >= 0.0)) throw std::domain_error("phi: t must be >= 0");
  if (x < 0.0) return 1.0;
  if (t == 0.0) return 0.0;
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double lam = lambda();
  if (kappa_.constant()) {
    return -std::expm1(-lam * kappa_.at_zero() * std::log1p(t / (x * lam)));
  }
  return -std::expm1(-lam * kappa_.log_integral(x, x + t / lam));
}

double LimitCdf::phi_by_quadrature(double t, double x) const {
  if (!(t >= 0.0)) throw std::domain_error("phi: t must be >= 0");
  if (x < 0.0) return 0.0;
  if (t == 0.0) return 1.0;
  if (x == 0.0) return 0.0;
  const double lam = lambda();
  const double integral = numerics::integrate(
      [this](double u) { return kappa_.value(std::exp(u)); }, std::log(x),
      std::log(x + t / lam), 1e-13);
  return std::exp(-lam * integral);
}

double LimitCdf::density(double t, double x) const {
  if (!(t > 0.0) || !(x > 0.0) || std::isinf(x)) return 0.0;
  const double lam = lambda();
  const double x2 = x + t / lam;
  return phi(t, x) * lam * (kappa_.value(x) / x - kappa_.value(x2) / x2);
}

PhiInfinity LimitCdf::phi_infinity(double x) const {
  if (kappa_.constant()) return {0.0, true};
  if (!(x > 0.0)) return {0.0, false};
  if (std::isinf(x)) return {1.0, false};
  return {std::exp(-lambda() * kappa_.log_integral(x, INFINITY)), false};
}

double LimitCdf::quantile(double t, double u) const {
  if (!(t > 0.0)) throw std::domain_error("quantile: t must be > 0");
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0, 1)");
  const double lam = lambda();
  const double span = t / lam;
  if (kappa_.constant()) {
    return span / std::expm1(-std::log(u) / (lam * kappa_.at_zero()));
  }
  // log Phi(t, e^v) - log u, increasing in v.
  const double target = std::log(u);
  auto f = [&](double v) {
    const double x = std::exp(v);
    return -lam * kappa_.log_integral(x, x + span) - target;
  };
  double lo = std::log(span);
  double hi = lo;
  double f_lo = f(lo);
  double f_hi = f_lo;
  while (f_lo > 0.0) {
    hi = lo;
    f_hi = f_lo;
    lo -= 4.0;
    if (lo < -700.0) throw NumericalError("quantile: lower bracket underflows");
    f_lo = f(lo);
  }
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi += 4.0;
    if (hi > 700.0) throw NumericalError("quantile: upper bracket overflows");
    f_hi = f(hi);
  }
  return std::exp(numerics::find_root(f, lo, hi, f_lo, f_hi, {1e-13, 0.0}, 300));
}

double regular_variation_exponent(const KappaFunction& kappa, double y_lo, double y_hi,
                                  std::size_t points) {
  if (kappa.constant()) {
    throw std::invalid_argument("regular_variation_exponent: undefined for gamma = 0");
  }
  if (!(y_lo > 0.0) || !(y_hi >= 100.0 * y_lo)) {
    throw std::invalid_argument("regular_variation_exponent: need y_hi / y_lo >= 100");
  }
  if (points < 2) throw std::invalid_argument("regular_variation_exponent: need >= 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double y : numerics::log_space(y_lo, y_hi, points)) {
    const double lx = std::log(y);
    const double ly = std::log(kappa.value(y));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points);
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tandem

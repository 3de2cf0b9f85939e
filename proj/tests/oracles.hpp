// Test-side reference implementations. Nothing here calls into the library:
// gamma functions are Lanczos + series/continued fraction, roots are plain
// bisection, so agreement with the library is a genuine cross-check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

constexpr double kPi = 3.14159265358979323846;

// Lanczos (g = 7, n = 9) for x > 0.5, reflection below.
inline double gamma_fn(double x) {
  static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                             771.32342877765313,   -176.61502916214059,   12.507343278686905,
                             -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) return kPi / (std::sin(kPi * x) * gamma_fn(1.0 - x));
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

inline double tail_constant(double nu) { return -1.0 / gamma_fn(1.0 - nu); }

// Upper incomplete gamma Gamma(a, s) for 0 < a < 1, s > 0.
inline double upper_gamma_positive(double a, double s) {
  if (s < a + 1.0) {
    // Gamma(a) - lower series.
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
      term *= s / (a + k);
      sum += term;
      if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
    }
    return gamma_fn(a) - sum * std::exp(-s + a * std::log(s));
  }
  // Modified Lentz on the continued fraction.
  const double tiny = 1e-300;
  double b = s + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-s + a * std::log(s)) * h;
}

// Gamma(-nu, s) for 1 < nu < 2 by stepping the recurrence
// Gamma(a, s) = (Gamma(a + 1, s) - s^a e^-s) / a down from a = 2 - nu.
inline double upper_gamma_minus_nu(double nu, double s) {
  const double a2 = 2.0 - nu;
  const double g2 = upper_gamma_positive(a2, s);
  const double g1 = (g2 - std::pow(s, 1.0 - nu) * std::exp(-s)) / (1.0 - nu);
  return (g1 - std::pow(s, -nu) * std::exp(-s)) / (-nu);
}

// E exp(-s T), T ~ Pareto(nu) on [1, inf): nu s^nu Gamma(-nu, s).
inline double pareto_laplace(double s, double nu) {
  if (s == 0.0) return 1.0;
  return nu * std::pow(s, nu) * upper_gamma_minus_nu(nu, s);
}

// d/ds E exp(-s T) = -E T e^{-sT} = -nu s^(nu-1) Gamma(1 - nu, s).
inline double pareto_laplace_derivative(double s, double nu) {
  const double g2 = upper_gamma_positive(2.0 - nu, s);
  const double g1 = (g2 - std::pow(s, 1.0 - nu) * std::exp(-s)) / (1.0 - nu);
  return -nu * std::pow(s, nu - 1.0) * g1;
}

// int_b^w exp(-c t) dF(t) for Pareto(nu, b), c > 0.
inline double pareto_exp_integral(double c, double nu, double b, double w) {
  if (w <= b) return 0.0;
  const double scale = nu * std::pow(c * b, nu);
  return scale * (upper_gamma_minus_nu(nu, c * b) - upper_gamma_minus_nu(nu, c * w));
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iterations = 200) {
  double flo = f(lo);
  if ((flo > 0.0) == (f(hi) > 0.0)) throw std::runtime_error("oracle::bisect: no sign change");
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// m(w) for the busy-period maximum at rate lambda, Pareto(nu, b).
inline double boxma_m(double lambda, double nu, double b, double w) {
  if (w <= b) return 0.0;
  auto g = [&](double m) {
    const double c = lambda * (1.0 - m);
    const double integral = c > 0.0 ? pareto_exp_integral(c, nu, b, w)
                                    : 1.0 - std::pow(b / w, nu);
    return integral - m;
  };
  return bisect(g, 0.0, 1.0);
}

// kappa(y) from H(k) = C L(lambda k) - k gamma y^(nu-1) C - (lambda k)^nu.
inline double kappa(double lambda, double nu, double gamma, double y) {
  const double c = tail_constant(nu);
  auto h = [&](double k) {
    return c * pareto_laplace(lambda * k, nu) - k * gamma * std::pow(y, nu - 1.0) * c -
           std::pow(lambda * k, nu);
  };
  const double hi = std::pow(c, 1.0 / nu) / lambda;
  return bisect(h, 1e-14, hi);
}

// Phi(t, x) for gamma = 0.
inline double phi_gamma0(double lambda, double kappa0, double t, double x) {
  return std::pow(1.0 + t / (x * lambda), -lambda * kappa0);
}

// One-sample KS for a continuous CDF, computed the textbook way.
template <class Cdf>
double ks(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace oracle

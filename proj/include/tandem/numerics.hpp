// Quadrature and bracketed root finding shared by the solvers.
//
// Built on Boost.Math rules so that every caller uses the same tolerance
// conventions and reports failures through NumericalError.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace tandem {

/// Raised when an iterative method cannot meet its contract (no bracket,
/// iteration budget exhausted, non-finite integrand).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace numerics {

inline constexpr unsigned kDefaultMaxIntervals = 2000;

/// n points, geometrically spaced, with both endpoints exact.
std::vector<double> log_space(double lo, double hi, std::size_t n);

/// n points, evenly spaced, with both endpoints exact.
std::vector<double> lin_space(double lo, double hi, std::size_t n);

/// Globally adaptive 15-point Gauss-Kronrod on a finite interval: the
/// interval with the largest error estimate is bisected until the summed
/// estimate is below rel_tol * |integral| or the roundoff floor of the
/// accumulated |f| mass. Returns the best estimate once max_intervals is hit.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-13,
                 unsigned max_intervals = kDefaultMaxIntervals, double* error_estimate = nullptr) {
  if (a == b) {
    if (error_estimate) *error_estimate = 0.0;
    return 0.0;
  }
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Cell {
    double lo, hi, value, error, l1;
    bool operator<(const Cell& other) const { return error < other.error; }
  };
  auto eval = [&f](double lo, double hi) {
    Cell c{lo, hi, 0.0, 0.0, 0.0};
    c.value = Rule::integrate(f, lo, hi, 0, 0.0, &c.error, &c.l1);
    c.error *= 0.5 * (hi - lo);  // Boost reports it on the reference interval
    return c;
  };
  std::priority_queue<Cell> cells;
  cells.push(eval(a, b));
  double value = cells.top().value;
  double error = cells.top().error;
  double l1 = cells.top().l1;
  constexpr double kRoundoff = 50.0 * std::numeric_limits<double>::epsilon();
  while (cells.size() < max_intervals && error > rel_tol * std::fabs(value) &&
         error > kRoundoff * l1 && error > std::numeric_limits<double>::min()) {
    const Cell worst = cells.top();
    cells.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;
    const Cell left = eval(worst.lo, mid);
    const Cell right = eval(mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    cells.push(left);
    cells.push(right);
  }
  if (!std::isfinite(value)) {
    throw NumericalError("integrate: non-finite result on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  }
  if (error_estimate) *error_estimate = error;
  return value;
}

/// Fixed 10-point Gauss-Legendre rule; used on short cells where the
/// integrand is analytic and adaptivity would only cost time.
template <class F>
double integrate_fixed(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 10>::integrate(std::forward<F>(f), a, b);
}

/// Termination test for bracketing solvers: stop once the bracket is
/// narrower than abs_tol + rel_tol * |x|, or a few ulps.
struct BracketTolerance {
  double abs_tol = 0.0;
  double rel_tol = 1e-14;

  bool operator()(double a, double b) const {
    const double scale = std::min(std::fabs(a), std::fabs(b));
    const double width = std::fabs(b - a);
    return width <= abs_tol + rel_tol * scale ||
           width <= 4.0 * std::numeric_limits<double>::epsilon() * scale;
  }
};

/// Root of f on [lo, hi] where f(lo) and f(hi) have opposite signs
/// (TOMS 748: bisection safeguarded secant/inverse-cubic steps).
template <class F>
double find_root(F&& f, double lo, double hi, double f_lo, double f_hi, BracketTolerance tol,
                 std::uintmax_t max_iter = 200) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NumericalError("find_root: interval [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "] does not bracket a root");
  }
  std::uintmax_t iters = max_iter;
  const auto bracket =
      boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
  if (iters >= max_iter) {
    throw NumericalError("find_root: no convergence after " + std::to_string(max_iter) +
                         " iterations");
  }
  return 0.5 * (bracket.first + bracket.second);
}

template <class F>
double find_root(F&& f, double lo, double hi, BracketTolerance tol, std::uintmax_t max_iter = 200) {
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  return find_root(std::forward<F>(f), lo, hi, f_lo, f_hi, tol, max_iter);
}

}  // namespace numerics
}  // namespace tandem

#include "tandem/boxma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tandem/numerics.hpp"
#include "tandem/parallel.hpp"

namespace tandem {

namespace {

constexpr double kLoadSlack = 1e-12;
constexpr double kQuadTol = 1e-12;

// int_b^w (1 - exp(-a t)) dF(t) for the Pareto law, in u = log t.
double absorbed_mass(double a, const ServiceDistribution& dist, double w) {
  const double b = dist.scale();
  if (w <= b || a == 0.0) return 0.0;
  const double nu = dist.nu();
  const double lo = std::log(b);
  const double hi = std::log(w);
  auto f = [a, nu, b](double u) {
    return -std::expm1(-a * std::exp(u)) * nu * std::exp(-nu * (u - std::log(b)));
  };
  const double knee = -std::log(a);
  if (knee > lo && knee < hi) {
    return numerics::integrate(f, lo, knee, kQuadTol) + numerics::integrate(f, knee, hi, kQuadTol);
  }
  return numerics::integrate(f, lo, hi, kQuadTol);
}

}  // namespace

void check_load(double lambda, const ServiceDistribution& dist) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("arrival rate lambda must be finite and > 0");
  }
  const double rho = lambda * dist.mean();
  if (rho > 1.0 + kLoadSlack) {
    throw std::invalid_argument("traffic intensity rho=" + std::to_string(rho) +
                                " exceeds 1; the busy-period maximum is defective");
  }
}

double solve_mbar_at(double lambda, const ServiceDistribution& dist, double w) {
  check_load(lambda, dist);
  if (!(w >= 0.0)) throw std::invalid_argument("solve_m_at: w must be >= 0");
  if (w <= dist.scale()) return 1.0;
  if (std::isinf(w)) return 0.0;
  const double fbar = dist.tail(w);
  // g(mbar) = Fbar(w) + int_b^w (1 - e^{-lambda t mbar}) dF - mbar is
  // strictly decreasing with g(0) > 0 > g(1).
  auto g = [&](double mbar) { return fbar + absorbed_mass(lambda * mbar, dist, w) - mbar; };
  return numerics::find_root(g, 0.0, 1.0, fbar, g(1.0), {0.0, 2e-15}, 400);
}

double solve_m_at(double lambda, const ServiceDistribution& dist, double w) {
  return 1.0 - solve_mbar_at(lambda, dist, w);
}

double boxma_residual(double lambda, const ServiceDistribution& dist, double w, double m) {
  if (w <= dist.scale()) return -m;
  const double a = lambda * (1.0 - m);
  return (dist.cdf(w) - absorbed_mass(a, dist, w)) - m;
}

GridSpec GridSpec::log_default(const ServiceDistribution& dist) {
  return GridSpec{dist.scale(), 1e4 * dist.scale(), 512};
}

std::vector<double> GridSpec::abscissae() const {
  return numerics::log_space(w_min, w_max, points);
}

MaxServiceCdf::MaxServiceCdf(double lambda, ServiceDistribution dist, std::vector<double> grid,
                             std::vector<double> mbar, std::vector<double> residuals)
    : lambda_(lambda),
      dist_(dist),
      grid_(std::move(grid)),
      mbar_(std::move(mbar)),
      residuals_(std::move(residuals)),
      tail_exponent_(dist.nu()) {
  if (grid_.empty() || grid_.size() != mbar_.size() || grid_.size() != residuals_.size()) {
    throw std::invalid_argument("MaxServiceCdf: grid, values and residuals must match");
  }
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1])) {
      throw std::invalid_argument("MaxServiceCdf: grid must be strictly increasing");
    }
    if (mbar_[i] > mbar_[i - 1]) {
      throw NumericalError("MaxServiceCdf: tabulated m decreases between w=" +
                           std::to_string(grid_[i - 1]) + " and w=" + std::to_string(grid_[i]));
    }
  }
  const std::size_t g = grid_.size();
  if (g >= 2 && grid_[g - 2] > dist_.scale() && mbar_[g - 1] > 0.0) {
    const double slope =
        -std::log(mbar_[g - 1] / mbar_[g - 2]) / std::log(grid_[g - 1] / grid_[g - 2]);
    if (std::isfinite(slope) && slope > 0.0) tail_exponent_ = slope;
  }
}

std::vector<double> MaxServiceCdf::m_values() const {
  std::vector<double> out(mbar_.size());
  std::transform(mbar_.begin(), mbar_.end(), out.begin(), [](double s) { return 1.0 - s; });
  return out;
}

double MaxServiceCdf::max_abs_residual() const {
  double worst = 0.0;
  for (double r : residuals_) worst = std::max(worst, std::fabs(r));
  return worst;
}

double MaxServiceCdf::survival(double w) const {
  const double b = dist_.scale();
  if (w <= b) return 1.0;
  const double w_last = grid_.back();
  if (w >= w_last) {
    if (w_last <= b) return std::pow(w / b, -tail_exponent_);
    return mbar_.back() * std::pow(w / w_last, -tail_exponent_);
  }
  // First node strictly above w; the node before it (or b) brackets w.
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), w);
  const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
  double w0 = b;
  double s0 = 1.0;
  if (hi > 0 && grid_[hi - 1] >= b) {
    w0 = grid_[hi - 1];
    s0 = mbar_[hi - 1];
  }
  const double frac = (w - w0) / (grid_[hi] - w0);
  return s0 + frac * (mbar_[hi] - s0);
}

double MaxServiceCdf::survival_quantile(double s) const {
  if (!(s > 0.0)) throw std::domain_error("survival_quantile: level must be > 0");
  const double b = dist_.scale();
  if (s >= 1.0) return b;
  const double w_last = grid_.back();
  if (s < mbar_.back() || w_last <= b) {
    const double anchor_w = w_last <= b ? b : w_last;
    const double anchor_s = w_last <= b ? 1.0 : mbar_.back();
    return anchor_w * std::pow(anchor_s / s, 1.0 / tail_exponent_);
  }
  // mbar_ is nonincreasing: find the first node with mbar <= s.
  const auto it = std::lower_bound(mbar_.begin(), mbar_.end(), s,
                                   [](double value, double level) { return value > level; });
  const std::size_t hi = static_cast<std::size_t>(it - mbar_.begin());
  if (mbar_[hi] == s) return grid_[hi];
  double w0 = b;
  double s0 = 1.0;
  if (hi > 0 && grid_[hi - 1] >= b) {
    w0 = grid_[hi - 1];
    s0 = mbar_[hi - 1];
  }
  const double frac = (s0 - s) / (s0 - mbar_[hi]);
  return w0 + frac * (grid_[hi] - w0);
}

MaxServiceCdf tabulate(double lambda, const ServiceDistribution& dist,
                       const std::vector<double>& grid, unsigned threads) {
  check_load(lambda, dist);
  if (grid.empty()) throw std::invalid_argument("tabulate: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw std::invalid_argument("tabulate: grid must be positive, finite and strictly increasing");
    }
  }
  std::vector<double> mbar(grid.size());
  std::vector<double> residual(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    try {
      mbar[i] = solve_mbar_at(lambda, dist, grid[i]);
    } catch (const NumericalError& e) {
      throw NumericalError("tabulate: solver failed at w=" + std::to_string(grid[i]) + ": " +
                           e.what());
    }
    residual[i] = boxma_residual(lambda, dist, grid[i], 1.0 - mbar[i]);
  });
  return MaxServiceCdf(lambda, dist, grid, std::move(mbar), std::move(residual));
}

MaxServiceCdf tabulate(double lambda, const ServiceDistribution& dist, const GridSpec& grid,
                       unsigned threads) {
  return tabulate(lambda, dist, grid.abscissae(), threads);
}

SteadyStateLaw::SteadyStateLaw(MaxServiceCdf maxcdf) : maxcdf_(std::move(maxcdf)), beyond_(0.0) {
  const double rho = maxcdf_.lambda() * maxcdf_.dist().mean();
  if (!(rho < 1.0 - kLoadSlack)) {
    throw std::invalid_argument("steady state requires rho < 1 (got rho=" + std::to_string(rho) +
                                ")");
  }
  const auto& w = maxcdf_.grid();
  const auto& s = maxcdf_.mbar_values();
  const double alpha = maxcdf_.tail_exponent();
  if (!(alpha > 1.0)) {
    throw NumericalError("steady state: extrapolated tail exponent " + std::to_string(alpha) +
                         " <= 1; extend the grid");
  }
  const double w_last = std::max(w.back(), maxcdf_.dist().scale());
  beyond_ = maxcdf_.survival(w_last) * w_last / (alpha - 1.0);
  cumulative_.assign(w.size(), 0.0);
  for (std::size_t i = w.size() - 1; i-- > 0;) {
    cumulative_[i] = cumulative_[i + 1] + 0.5 * (s[i] + s[i + 1]) * (w[i + 1] - w[i]);
  }
}

double SteadyStateLaw::tail_integral(double w) const {
  const auto& grid = maxcdf_.grid();
  const double b = maxcdf_.dist().scale();
  const double alpha = maxcdf_.tail_exponent();
  const double w_last = std::max(grid.back(), b);
  if (w >= w_last) {
    return maxcdf_.survival(w) * w / (alpha - 1.0);
  }
  // Index of the first grid node >= max(w, b) that lies above b.
  const double from = std::max(w, b);
  const auto it = std::lower_bound(grid.begin(), grid.end(), from);
  std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  double total = beyond_ + cumulative_[hi];
  // Partial cell [from, grid[hi]] under the linear interpolant.
  total += 0.5 * (maxcdf_.survival(from) + maxcdf_.mbar_values()[hi]) * (grid[hi] - from);
  if (w < b) total += b - std::max(w, 0.0);
  return total;
}

double SteadyStateLaw::cdf(double w) const {
  if (w < maxcdf_.dist().scale()) return 0.0;
  return maxcdf_.cdf(w) * std::exp(-maxcdf_.lambda() * tail_integral(w));
}

SteadyStateLaw steady_state_law(double lambda, const ServiceDistribution& dist,
                                const GridSpec& grid, unsigned threads) {
  return SteadyStateLaw(tabulate(lambda, dist, grid, threads));
}

}  // namespace tandem

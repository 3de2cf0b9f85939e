// Law of the largest service time in an M/G/1 busy period.
//
// For arrival rate lambda and service law F with rho = lambda E[V] <= 1, the
// distribution function m of the busy-period maximum is, at every w, the
// unique m in [0, 1] with
//
//     m = int_0^w exp(-lambda t (1 - m)) dF(t).
//
// The solvers below work with the complement mbar = 1 - m, which keeps full
// relative precision deep in the tail where the heavy-traffic scaling lives.
#pragma once

#include <cstddef>
#include <vector>

#include "tandem/heavytail.hpp"
#include "tandem/random.hpp"

namespace tandem {

/// Throws std::invalid_argument unless lambda > 0 and lambda * E[V] <= 1.
void check_load(double lambda, const ServiceDistribution& dist);

/// 1 - m(w). Returns 1 for w <= b.
double solve_mbar_at(double lambda, const ServiceDistribution& dist, double w);

/// m(w), the busy-period-maximum CDF at w. Returns 0 for w <= b.
double solve_m_at(double lambda, const ServiceDistribution& dist, double w);

/// int_0^w exp(-lambda t (1 - m)) dF(t) - m, by quadrature.
double boxma_residual(double lambda, const ServiceDistribution& dist, double w, double m);

struct GridSpec {
  double w_min = 1.0;
  double w_max = 1e4;
  std::size_t points = 512;

  /// Log-spaced [b, 1e4 b] with 512 points.
  static GridSpec log_default(const ServiceDistribution& dist);
  std::vector<double> abscissae() const;
};

/// Tabulated busy-period-maximum law. Between nodes m is interpolated
/// linearly in w; beyond the last node the tail is extended as a power law
/// whose exponent is read off the last grid segment.
class MaxServiceCdf {
 public:
  MaxServiceCdf(double lambda, ServiceDistribution dist, std::vector<double> grid,
                std::vector<double> mbar, std::vector<double> residuals);

  double lambda() const { return lambda_; }
  const ServiceDistribution& dist() const { return dist_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& mbar_values() const { return mbar_; }
  const std::vector<double>& residuals() const { return residuals_; }
  std::vector<double> m_values() const;

  double cdf(double w) const { return 1.0 - survival(w); }
  double survival(double w) const;

  /// w with m(w) = u.
  double quantile(double u) const { return survival_quantile(1.0 - u); }
  /// w with 1 - m(w) = s; s in (0, 1].
  double survival_quantile(double s) const;
  double sample(RandomStream& rng) const { return survival_quantile(rng.uniform()); }

  /// Decay exponent alpha of the extrapolated tail mbar(w) ~ w^-alpha.
  double tail_exponent() const { return tail_exponent_; }
  double max_abs_residual() const;

 private:
  double lambda_;
  ServiceDistribution dist_;
  std::vector<double> grid_;
  std::vector<double> mbar_;
  std::vector<double> residuals_;
  double tail_exponent_;
};

/// Solves at every abscissa of the grid. Grid points must be strictly
/// increasing and start at or below b. Solves are independent and are spread
/// over `threads` workers (0 = hardware concurrency).
MaxServiceCdf tabulate(double lambda, const ServiceDistribution& dist, const GridSpec& grid,
                       unsigned threads = 1);
MaxServiceCdf tabulate(double lambda, const ServiceDistribution& dist,
                       const std::vector<double>& grid, unsigned threads = 1);

/// Steady-state law of the embedded workload for rho < 1:
///     P(R <= w) = m(w) exp(-lambda int_w^inf mbar(y) dy).
class SteadyStateLaw {
 public:
  explicit SteadyStateLaw(MaxServiceCdf maxcdf);

  const MaxServiceCdf& maxcdf() const { return maxcdf_; }
  /// int_w^inf mbar(y) dy for the tabulated (interpolated) mbar.
  double tail_integral(double w) const;
  /// Contribution of the power-law extension beyond the last grid node.
  double truncation_tail() const { return beyond_; }
  double cdf(double w) const;

 private:
  MaxServiceCdf maxcdf_;
  std::vector<double> cumulative_;  // int_{w_i}^{w_G} mbar
  double beyond_;
};

SteadyStateLaw steady_state_law(double lambda, const ServiceDistribution& dist,
                                const GridSpec& grid, unsigned threads = 1);

/// steady_state_cdf(law, w): convenience mirror of law.cdf(w).
inline double steady_state_cdf(const SteadyStateLaw& law, double w) { return law.cdf(w); }

}  // namespace tandem

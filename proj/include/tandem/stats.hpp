// Empirical distributions and goodness-of-fit statistics.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace tandem {

/// Sorted sample with its right-continuous step CDF.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> sample);

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }
  /// Fraction of sample values <= x.
  double cdf(double x) const;
  double mean() const;
  /// Sample standard deviation (n - 1 denominator); 0 for a single value.
  double stddev() const;

 private:
  std::vector<double> sorted_;
};

using CdfFunction = std::function<double(double)>;

/// sup_x |F_n(x) - F(x)|. Ties in the sample are grouped; when F has atoms,
/// pass its left limit F(x-) as `left` so jumps are compared correctly.
double ks_distance(const EmpiricalDistribution& sample, const CdfFunction& cdf,
                   const CdfFunction& left = nullptr);

/// Two-sample statistic sup_x |F_n(x) - G_m(x)|.
double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Spearman rank correlation (average ranks for ties).
double rank_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanEstimate mean_estimate(const std::vector<double>& values);

}  // namespace tandem

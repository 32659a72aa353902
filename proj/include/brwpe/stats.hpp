#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace brwpe::stats {

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct Interval {
  double lo = 0, hi = 0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = kZ99);

/// Welford running mean and variance.
class Accumulator {
 public:
  void add(double x);
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance (0 for fewer than two values).
  double variance() const noexcept;
  /// Standard error of the mean.
  double se() const noexcept;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0, m2_ = 0;
};

double mean(std::span<const double> x);
/// Linear-interpolation quantile (type 7) of unsorted data; requires non-empty input.
double quantile(std::vector<double> x, double p);
double median(std::vector<double> x);

/// log C(n, k).
double log_binomial(std::uint64_t n, std::uint64_t k);
/// P(Bin(n, p) <= k), summed exactly in log space.
double binomial_cdf(std::uint64_t n, double p, std::uint64_t k);
/// P(Bin(n, p) >= k).
double binomial_sf(std::uint64_t n, double p, std::uint64_t k);

struct KsResult {
  double statistic = 0;
  double p_value = 1;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov distribution.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_sf(double lambda);

struct SignTestResult {
  std::uint64_t increases = 0, decreases = 0, ties = 0;
  double p_decrease = 1;  ///< one-sided p-value for "decreases dominate"
  double p_increase = 1;  ///< one-sided p-value for "increases dominate"
};

/// Sign test on a list of paired differences (ties dropped).
SignTestResult sign_test(std::span<const double> differences);

/// Percentile bootstrap interval for the median.
Interval bootstrap_median_interval(std::span<const double> x, std::uint64_t resamples, double level, std::uint64_t seed);

}  // namespace brwpe::stats

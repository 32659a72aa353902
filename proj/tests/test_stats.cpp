#include <doctest.h>

#include <cmath>
#include <random>

#include "brwpe/stats.hpp"
#include "oracles.hpp"

using namespace brwpe;

TEST_CASE("Wilson interval matches the closed form") {
  const std::uint64_t k = 37, n = 120;
  const double z = stats::kZ99, p = double(k) / n;
  const double centre = (p + z * z / (2 * n)) / (1 + z * z / n);
  const double half = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n));
  const auto ci = stats::wilson_interval(k, n);
  CHECK(ci.lo == doctest::Approx(centre - half).epsilon(1e-14));
  CHECK(ci.hi == doctest::Approx(centre + half).epsilon(1e-14));
  const auto zero = stats::wilson_interval(0, 1000);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
  CHECK(stats::wilson_interval(1000, 1000).hi == doctest::Approx(1.0));
}

TEST_CASE("binomial tails against integer coefficients") {
  for (unsigned k = 0; k <= 64; k += 4)
    CHECK(stats::binomial_cdf(64, 0.5, k) == doctest::Approx(static_cast<double>(oracle::binom64_half_cdf(k))).epsilon(1e-12));
  CHECK(stats::binomial_cdf(64, 0.5, 16) == doctest::Approx(3.866538440643513e-05).epsilon(1e-12));
  CHECK(stats::binomial_sf(64, 0.5, 48) == doctest::Approx(static_cast<double>(oracle::binom64_half_cdf(16))).epsilon(1e-12));
  CHECK(stats::binomial_sf(10, 0.3, 0) == 1.0);
  CHECK(stats::binomial_cdf(10, 0.3, 10) == doctest::Approx(1.0));
  CHECK(stats::binomial_cdf(5, 0.2, 1) == doctest::Approx(std::pow(0.8, 5) + 5 * 0.2 * std::pow(0.8, 4)));
  CHECK(stats::log_binomial(10, 3) == doctest::Approx(std::log(120.0)));
}

TEST_CASE("accumulator and quantiles") {
  stats::Accumulator a;
  for (double x : {1.0, 2.0, 3.0, 4.0}) a.add(x);
  CHECK(a.mean() == 2.5);
  CHECK(a.variance() == doctest::Approx(5.0 / 3));
  CHECK(a.se() == doctest::Approx(std::sqrt(5.0 / 12)));
  CHECK(stats::median({3, 1, 2}) == 2);
  CHECK(stats::median({4, 1, 2, 3}) == 2.5);
  CHECK(stats::quantile({1, 2, 3, 4, 5}, 0.1) == doctest::Approx(1.4));
  CHECK(stats::quantile({7}, 0.9) == 7);
}

TEST_CASE("sign test") {
  const std::vector<double> diffs = {1, 2, -1, 0, 3, 4};
  const auto r = stats::sign_test(diffs);
  CHECK(r.increases == 4);
  CHECK(r.decreases == 1);
  CHECK(r.ties == 1);
  CHECK(r.p_decrease == doctest::Approx(31.0 / 32));
  CHECK(r.p_increase == doctest::Approx(6.0 / 32));
  const auto empty = stats::sign_test(std::vector<double>{});
  CHECK(empty.p_decrease == 1.0);
}

TEST_CASE("Kolmogorov distribution and the two-sample test") {
  CHECK(stats::kolmogorov_sf(0.0) == 1.0);
  CHECK(stats::kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(stats::kolmogorov_sf(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
  std::mt19937_64 g(3);
  std::normal_distribution<double> n01(0, 1), shifted(0.5, 1);
  std::vector<double> a(800), b(800), c(800);
  for (auto& x : a) x = n01(g);
  for (auto& x : b) x = n01(g);
  for (auto& x : c) x = shifted(g);
  CHECK(stats::ks_two_sample(a, b).p_value > 0.01);
  CHECK(stats::ks_two_sample(a, c).p_value < 1e-6);
  CHECK(stats::ks_two_sample({1, 2, 3}, {1, 2, 3}).statistic == 0.0);
}

TEST_CASE("bootstrap median interval") {
  std::vector<double> x(201);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = double(i);
  const auto ci = stats::bootstrap_median_interval(x, 2000, 0.95, 1);
  CHECK(ci.lo < 100);
  CHECK(ci.hi > 100);
  CHECK(ci.lo > 70);
  CHECK(ci.hi < 130);
  const auto again = stats::bootstrap_median_interval(x, 2000, 0.95, 1);
  CHECK(again.lo == ci.lo);
  CHECK(again.hi == ci.hi);
}

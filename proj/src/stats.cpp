#include "brwpe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "brwpe/rng.hpp"

namespace brwpe::stats {

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  if (successes > n) throw std::invalid_argument("successes exceed trials");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1 + z2 / nn;
  const double centre = (p + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

void Accumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double Accumulator::variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double Accumulator::se() const noexcept { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

double mean(std::span<const double> x) {
  Accumulator a;
  for (double v : x) a.add(v);
  return a.mean();
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw std::invalid_argument("quantile of empty data");
  std::sort(x.begin(), x.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(x.size() - 1);
  const auto j = static_cast<std::size_t>(pos);
  if (j + 1 >= x.size()) return x.back();
  const double w = pos - static_cast<double>(j);
  return x[j] + w * (x[j + 1] - x[j]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -INFINITY;
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  return std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1);
}

namespace {

long double binomial_sum(std::uint64_t n, double p, std::uint64_t from, std::uint64_t to) {
  if (from > to) return 0;
  const double lp = std::log(p), lq = std::log1p(-p);
  long double s = 0;
  for (std::uint64_t k = from; k <= to; ++k)
    s += std::exp(static_cast<long double>(log_binomial(n, k) + static_cast<double>(k) * lp +
                                           static_cast<double>(n - k) * lq));
  return s;
}

}  // namespace

double binomial_cdf(std::uint64_t n, double p, std::uint64_t k) {
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("binomial p outside [0,1]");
  if (k >= n) return 1.0;
  if (p == 0) return 1.0;
  if (p == 1) return 0.0;
  // Sum the shorter tail.
  if (static_cast<double>(k) < p * static_cast<double>(n)) return static_cast<double>(binomial_sum(n, p, 0, k));
  return static_cast<double>(1.0L - binomial_sum(n, p, k + 1, n));
}

double binomial_sf(std::uint64_t n, double p, std::uint64_t k) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0) return 0.0;
  if (p == 1) return 1.0;
  if (static_cast<double>(k) > p * static_cast<double>(n)) return static_cast<double>(binomial_sum(n, p, k, n));
  return 1.0 - binomial_cdf(n, p, k - 1);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double s = 0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)};
}

SignTestResult sign_test(std::span<const double> differences) {
  SignTestResult r;
  for (double x : differences) {
    if (x > 0) ++r.increases;
    else if (x < 0) ++r.decreases;
    else ++r.ties;
  }
  const std::uint64_t n = r.increases + r.decreases;
  r.p_decrease = binomial_sf(n, 0.5, r.decreases);
  r.p_increase = binomial_sf(n, 0.5, r.increases);
  return r;
}

Interval bootstrap_median_interval(std::span<const double> x, std::uint64_t resamples, double level, std::uint64_t seed) {
  if (x.empty()) throw std::invalid_argument("bootstrap of empty data");
  Rng rng(seed);
  std::vector<double> meds(resamples), sample(x.size());
  const auto n = static_cast<std::uint32_t>(x.size());
  for (std::uint64_t b = 0; b < resamples; ++b) {
    for (auto& s : sample) s = x[rng.below(n)];
    meds[b] = median(sample);
  }
  const double a = (1 - level) / 2;
  return {quantile(meds, a), quantile(std::move(meds), 1 - a)};
}

}  // namespace brwpe::stats

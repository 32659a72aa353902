#include "brwpe/lattice.hpp"

#include <cmath>
#include <limits>

namespace brwpe {

std::string format_site(const Site& s, int d, char sep) {
  std::string out;
  for (int i = 0; i < d; ++i) {
    if (i) out += sep;
    out += std::to_string(s[i]);
  }
  return out;
}

namespace {

// Largest integer n with n < radius.
std::int64_t strict_floor(double radius) {
  if (!(radius > 0)) return -1;
  const double c = std::ceil(radius);
  return static_cast<std::int64_t>(c) - 1;
}

void enumerate(int d, int dim, Site& cur, std::int64_t budget, std::vector<Site>& out) {
  if (dim == d) {
    out.push_back(cur);
    return;
  }
  const auto base = cur[dim];
  for (std::int64_t v = -budget; v <= budget; ++v) {
    cur[dim] = static_cast<std::int32_t>(base + v);
    enumerate(d, dim + 1, cur, budget - (v < 0 ? -v : v), out);
  }
  cur[dim] = base;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return (a > std::numeric_limits<std::uint64_t>::max() - b) ? std::numeric_limits<std::uint64_t>::max()
                                                              : a + b;
}

std::uint64_t binom(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    const auto num = static_cast<std::uint64_t>(n - k + i);
    // r * num / i stays exact because r*num is divisible by i at each step.
    const std::uint64_t prod = saturating_mul(r, num);
    if (prod == std::numeric_limits<std::uint64_t>::max()) return prod;
    r = prod / static_cast<std::uint64_t>(i);
  }
  return r;
}

}  // namespace

std::vector<Site> l1_ball(int d, const Site& center, double radius) {
  std::vector<Site> out;
  const auto n = strict_floor(radius);
  if (n < 0) return out;
  Site cur = center;
  enumerate(d, 0, cur, n, out);
  return out;
}

std::uint64_t l1_sphere_size(int d, std::int64_t k) {
  if (k < 0) return 0;
  if (k == 0) return 1;
  // Choose j nonzero coordinates, their signs, and a composition of k into j positive parts.
  std::uint64_t total = 0;
  for (int j = 1; j <= d; ++j) {
    std::uint64_t term = saturating_mul(binom(d, j), std::uint64_t{1} << j);
    term = saturating_mul(term, binom(k - 1, j - 1));
    total = saturating_add(total, term);
  }
  return total;
}

std::uint64_t l1_ball_size(int d, double radius) {
  const auto n = strict_floor(radius);
  if (n < 0) return 0;
  // |{z : |z|_1 <= n}| = sum_j 2^j C(d,j) C(n,j).
  std::uint64_t total = 0;
  for (int j = 0; j <= d; ++j) {
    std::uint64_t term = saturating_mul(binom(d, j), std::uint64_t{1} << j);
    term = saturating_mul(term, binom(n, j));
    total = saturating_add(total, term);
  }
  return total;
}

}  // namespace brwpe

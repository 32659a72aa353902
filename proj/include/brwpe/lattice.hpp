#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace brwpe {

inline constexpr int kMaxDim = 4;

/// A point of Z^d. Coordinates beyond the active dimension are kept at zero,
/// so the defaulted ordering is lexicographic over the active coordinates.
struct Site {
  std::array<std::int32_t, kMaxDim> x{};

  constexpr std::int32_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  constexpr std::int32_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

  auto operator<=>(const Site&) const = default;

  static Site origin() { return Site{}; }
  static Site axis(int dim, std::int32_t value) {
    Site s;
    s[dim] = value;
    return s;
  }
};

inline std::int64_t l1_norm(const Site& s, int d) {
  std::int64_t n = 0;
  for (int i = 0; i < d; ++i) n += s[i] < 0 ? -static_cast<std::int64_t>(s[i]) : s[i];
  return n;
}

inline std::int64_t l1_distance(const Site& a, const Site& b, int d) {
  std::int64_t n = 0;
  for (int i = 0; i < d; ++i) {
    const std::int64_t diff = static_cast<std::int64_t>(a[i]) - b[i];
    n += diff < 0 ? -diff : diff;
  }
  return n;
}

/// The 2d nearest neighbours, ordered (+e_0, -e_0, +e_1, -e_1, ...).
inline Site neighbour(const Site& s, int direction) {
  Site n = s;
  n[direction / 2] += (direction % 2 == 0) ? 1 : -1;
  return n;
}

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto c : s.x) {
      h ^= static_cast<std::uint32_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Formats the first d coordinates as "x0 x1 ...".
std::string format_site(const Site& s, int d, char sep = ' ');

/// All sites z with |z - center|_1 < radius (open L1 ball), in lexicographic order.
std::vector<Site> l1_ball(int d, const Site& center, double radius);

/// Number of sites in the open L1 ball of the given radius, computed combinatorially.
/// Saturates at UINT64_MAX.
std::uint64_t l1_ball_size(int d, double radius);

/// Number of sites at L1 distance exactly k from a point.
std::uint64_t l1_sphere_size(int d, std::int64_t k);

}  // namespace brwpe

#include <algorithm>
#include <cmath>

#include "brwpe/simd/kernels.hpp"

namespace brwpe::simd::detail {

namespace {

void masked_neighbor_sum(const double* in, double* out, const double* mask, std::size_t begin, std::size_t end,
                         const std::ptrdiff_t* offsets, int n_offsets) {
  for (std::size_t i = begin; i < end; ++i) {
    double s = in[static_cast<std::ptrdiff_t>(i) + offsets[0]];
    for (int k = 1; k < n_offsets; ++k) s = s + in[static_cast<std::ptrdiff_t>(i) + offsets[k]];
    out[i] = mask[i] * s;
  }
}

double scale_accumulate(double* acc, double* term, double factor, double tol, std::size_t n) {
  double worst = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = term[i] * factor;
    term[i] = t;
    const double a = acc[i] + t;
    acc[i] = a;
    worst = std::max(worst, t - tol * a);
  }
  return worst;
}

void multiply(double* u, const double* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) u[i] = u[i] * g[i];
}

void scale(double* u, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) u[i] = u[i] * c;
}

double max_value(const double* u, std::size_t n) {
  double m = u[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, u[i]);
  return m;
}

double max_weighted_diff(const double* a, const double* b, double floor, std::size_t n) {
  double m = 0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]) / (std::abs(b[i]) + floor));
  return m;
}

double l1(const PointsSoA& pts, std::size_t i, const double* z) {
  double s = std::abs(pts.coord[0][i] - z[0]);
  for (int k = 1; k < pts.d; ++k) s = s + std::abs(pts.coord[k][i] - z[k]);
  return s;
}

void relax_l1(const PointsSoA& pts, const double* src, double base, double w, double* dist,
              const std::uint8_t* settled) {
  for (std::size_t i = 0; i < pts.n; ++i) {
    if (settled[i]) continue;
    const double cand = base + w * l1(pts, i, src);
    if (cand < dist[i]) dist[i] = cand;
  }
}

std::size_t argmin_unsettled(const double* dist, const std::uint8_t* settled, std::size_t n) {
  std::size_t best = n;
  double best_v = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    if (settled[i]) continue;
    if (best == n || dist[i] < best_v) {
      best = i;
      best_v = dist[i];
    }
  }
  return best;
}

double max_minus_l1(const PointsSoA& pts, const double* g, const double* z, double w) {
  double m = -INFINITY;
  for (std::size_t i = 0; i < pts.n; ++i) m = std::max(m, g[i] - w * l1(pts, i, z));
  return m;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar,    masked_neighbor_sum, scale_accumulate, multiply,
                                 scale,          max_value,           max_weighted_diff, relax_l1,
                                 argmin_unsettled, max_minus_l1};
  return table;
}

}  // namespace brwpe::simd::detail

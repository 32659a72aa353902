#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "brwpe/simd/kernels.hpp"

namespace brwpe::simd::detail {

namespace {

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

inline double hmax(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return std::max(std::max(t[0], t[1]), std::max(t[2], t[3]));
}

inline double hmin(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return std::min(std::min(t[0], t[1]), std::min(t[2], t[3]));
}

// Lanes with settled != 0 get an all-ones mask.
inline __m256d settled_mask(const std::uint8_t* settled) {
  int word;
  std::memcpy(&word, settled, sizeof word);
  const __m128i bytes = _mm_cvtsi32_si128(word);
  const __m256i wide = _mm256_cvtepu8_epi64(bytes);
  const __m256i is_zero = _mm256_cmpeq_epi64(wide, _mm256_setzero_si256());
  return _mm256_castsi256_pd(_mm256_xor_si256(is_zero, _mm256_set1_epi64x(-1)));
}

inline __m256d l1_pd(const PointsSoA& pts, std::size_t i, const double* z) {
  __m256d s = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(pts.coord[0] + i), _mm256_set1_pd(z[0])));
  for (int k = 1; k < pts.d; ++k)
    s = _mm256_add_pd(s, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(pts.coord[k] + i), _mm256_set1_pd(z[k]))));
  return s;
}

inline double l1_scalar(const PointsSoA& pts, std::size_t i, const double* z) {
  double s = std::abs(pts.coord[0][i] - z[0]);
  for (int k = 1; k < pts.d; ++k) s = s + std::abs(pts.coord[k][i] - z[k]);
  return s;
}

void masked_neighbor_sum(const double* in, double* out, const double* mask, std::size_t begin, std::size_t end,
                         const std::ptrdiff_t* offsets, int n_offsets) {
  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    const double* p = in + i;
    __m256d s = _mm256_loadu_pd(p + offsets[0]);
    for (int k = 1; k < n_offsets; ++k) s = _mm256_add_pd(s, _mm256_loadu_pd(p + offsets[k]));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(mask + i), s));
  }
  for (; i < end; ++i) {
    double s = in[static_cast<std::ptrdiff_t>(i) + offsets[0]];
    for (int k = 1; k < n_offsets; ++k) s = s + in[static_cast<std::ptrdiff_t>(i) + offsets[k]];
    out[i] = mask[i] * s;
  }
}

double scale_accumulate(double* acc, double* term, double factor, double tol, std::size_t n) {
  const __m256d f = _mm256_set1_pd(factor);
  const __m256d tv = _mm256_set1_pd(tol);
  __m256d worst = _mm256_set1_pd(-INFINITY);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(_mm256_loadu_pd(term + i), f);
    _mm256_storeu_pd(term + i, t);
    const __m256d a = _mm256_add_pd(_mm256_loadu_pd(acc + i), t);
    _mm256_storeu_pd(acc + i, a);
    worst = _mm256_max_pd(worst, _mm256_sub_pd(t, _mm256_mul_pd(tv, a)));
  }
  double w = hmax(worst);
  for (; i < n; ++i) {
    const double t = term[i] * factor;
    term[i] = t;
    const double a = acc[i] + t;
    acc[i] = a;
    w = std::max(w, t - tol * a);
  }
  return w;
}

void multiply(double* u, const double* g, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(u + i, _mm256_mul_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(g + i)));
  for (; i < n; ++i) u[i] = u[i] * g[i];
}

void scale(double* u, double c, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(u + i, _mm256_mul_pd(_mm256_loadu_pd(u + i), cv));
  for (; i < n; ++i) u[i] = u[i] * c;
}

double max_value(const double* u, std::size_t n) {
  std::size_t i = 0;
  double m = u[0];
  if (n >= 4) {
    __m256d mv = _mm256_loadu_pd(u);
    for (i = 4; i + 4 <= n; i += 4) mv = _mm256_max_pd(mv, _mm256_loadu_pd(u + i));
    m = hmax(mv);
  }
  for (; i < n; ++i) m = std::max(m, u[i]);
  return m;
}

double max_weighted_diff(const double* a, const double* b, double floor, std::size_t n) {
  const __m256d fl = _mm256_set1_pd(floor);
  __m256d mv = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d bv = _mm256_loadu_pd(b + i);
    const __m256d num = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), bv));
    mv = _mm256_max_pd(mv, _mm256_div_pd(num, _mm256_add_pd(abs_pd(bv), fl)));
  }
  double m = hmax(mv);
  for (; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]) / (std::abs(b[i]) + floor));
  return m;
}

void relax_l1(const PointsSoA& pts, const double* src, double base, double w, double* dist,
              const std::uint8_t* settled) {
  const __m256d bv = _mm256_set1_pd(base);
  const __m256d wv = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= pts.n; i += 4) {
    const __m256d cand = _mm256_add_pd(bv, _mm256_mul_pd(wv, l1_pd(pts, i, src)));
    const __m256d cur = _mm256_loadu_pd(dist + i);
    const __m256d better = _mm256_andnot_pd(settled_mask(settled + i), _mm256_cmp_pd(cand, cur, _CMP_LT_OQ));
    _mm256_storeu_pd(dist + i, _mm256_blendv_pd(cur, cand, better));
  }
  for (; i < pts.n; ++i) {
    if (settled[i]) continue;
    const double cand = base + w * l1_scalar(pts, i, src);
    if (cand < dist[i]) dist[i] = cand;
  }
}

std::size_t argmin_unsettled(const double* dist, const std::uint8_t* settled, std::size_t n) {
  const __m256d inf = _mm256_set1_pd(INFINITY);
  __m256d mv = inf;
  std::size_t i = 0;
  bool any = false;
  for (; i + 4 <= n; i += 4) {
    const __m256d sm = settled_mask(settled + i);
    any = any || _mm256_movemask_pd(sm) != 0xF;
    mv = _mm256_min_pd(mv, _mm256_blendv_pd(_mm256_loadu_pd(dist + i), inf, sm));
  }
  double m = hmin(mv);
  for (std::size_t j = i; j < n; ++j) {
    if (settled[j]) continue;
    any = true;
    m = std::min(m, dist[j]);
  }
  if (!any) return n;
  for (std::size_t j = 0; j < n; ++j)
    if (!settled[j] && dist[j] == m) return j;
  return n;
}

double max_minus_l1(const PointsSoA& pts, const double* g, const double* z, double w) {
  const __m256d wv = _mm256_set1_pd(w);
  __m256d mv = _mm256_set1_pd(-INFINITY);
  std::size_t i = 0;
  for (; i + 4 <= pts.n; i += 4)
    mv = _mm256_max_pd(mv, _mm256_sub_pd(_mm256_loadu_pd(g + i), _mm256_mul_pd(wv, l1_pd(pts, i, z))));
  double m = hmax(mv);
  for (; i < pts.n; ++i) m = std::max(m, g[i] - w * l1_scalar(pts, i, z));
  return m;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::Avx2,      masked_neighbor_sum, scale_accumulate, multiply,
                                 scale,          max_value,           max_weighted_diff, relax_l1,
                                 argmin_unsettled, max_minus_l1};
  return &table;
}

}  // namespace brwpe::simd::detail

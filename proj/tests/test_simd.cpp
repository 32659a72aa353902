#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "brwpe/simd/kernels.hpp"

using namespace brwpe::simd;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<double> random_vec(std::mt19937_64& g, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(g);
  return v;
}

}  // namespace

TEST_CASE("scalar table is always available") {
  REQUIRE(kernels_for(Isa::Scalar) != nullptr);
  CHECK(kernels_for(Isa::Scalar)->isa == Isa::Scalar);
  CHECK(isa_name(kernels().isa).size() > 0);
}

TEST_CASE("AVX2 kernels agree bit-for-bit with the scalar reference") {
  const KernelTable* v = kernels_for(Isa::Avx2);
  if (!v) {
    MESSAGE("AVX2 not available; equivalence test skipped");
    return;
  }
  const KernelTable& s = *kernels_for(Isa::Scalar);
  std::mt19937_64 g(12345);
  for (std::size_t n : {1ul, 3ul, 4ul, 5ul, 17ul, 64ul, 1001ul}) {
    CAPTURE(n);
    {
      // Padded 2-d grid of width W so offsets stay in range.
      const std::size_t W = 7, pad = W + 1;
      const std::size_t total = n + 2 * pad;
      auto in = random_vec(g, total, 0, 1);
      auto mask = random_vec(g, total, 0, 1);
      for (auto& m : mask) m = m < 0.3 ? 0.0 : 1.0;
      const std::ptrdiff_t offs[] = {1, -1, static_cast<std::ptrdiff_t>(W), -static_cast<std::ptrdiff_t>(W)};
      std::vector<double> o1(total, -1), o2(total, -1);
      s.masked_neighbor_sum(in.data(), o1.data(), mask.data(), pad, pad + n, offs, 4);
      v->masked_neighbor_sum(in.data(), o2.data(), mask.data(), pad, pad + n, offs, 4);
      CHECK(same_bits(o1, o2));
    }
    {
      auto acc1 = random_vec(g, n, 0, 2), term1 = random_vec(g, n, 0, 1);
      auto acc2 = acc1, term2 = term1;
      const double r1 = s.scale_accumulate(acc1.data(), term1.data(), 0.37, 1e-3, n);
      const double r2 = v->scale_accumulate(acc2.data(), term2.data(), 0.37, 1e-3, n);
      CHECK(same_bits(acc1, acc2));
      CHECK(same_bits(term1, term2));
      CHECK(same_bits(r1, r2));
    }
    {
      auto u1 = random_vec(g, n, -3, 3), gg = random_vec(g, n, 0, 5);
      auto u2 = u1;
      s.multiply(u1.data(), gg.data(), n);
      v->multiply(u2.data(), gg.data(), n);
      CHECK(same_bits(u1, u2));
      s.scale(u1.data(), 1.0 / 3.0, n);
      v->scale(u2.data(), 1.0 / 3.0, n);
      CHECK(same_bits(u1, u2));
      CHECK(same_bits(s.max_value(u1.data(), n), v->max_value(u2.data(), n)));
      auto b = random_vec(g, n, -1, 1);
      CHECK(same_bits(s.max_weighted_diff(u1.data(), b.data(), 1e-3, n), v->max_weighted_diff(u1.data(), b.data(), 1e-3, n)));
    }
    for (int d = 1; d <= 4; ++d) {
      std::vector<std::vector<double>> c(4);
      PointsSoA pts;
      pts.d = d;
      pts.n = n;
      std::uniform_int_distribution<int> coord(-20, 20);
      for (int k = 0; k < d; ++k) {
        c[k].resize(n);
        for (auto& x : c[k]) x = coord(g);
        pts.coord[k] = c[k].data();
      }
      const double src[4] = {1, -2, 3, 0};
      auto dist1 = random_vec(g, n, 0, 50);
      for (std::size_t i = 0; i < n; i += 3) dist1[i] = std::numeric_limits<double>::infinity();
      auto dist2 = dist1;
      std::vector<std::uint8_t> settled(n + 4, 0);
      for (std::size_t i = 0; i < n; i += 4) settled[i] = 1;
      s.relax_l1(pts, src, 0.5, 0.731, dist1.data(), settled.data());
      v->relax_l1(pts, src, 0.5, 0.731, dist2.data(), settled.data());
      CHECK(same_bits(dist1, dist2));
      CHECK(s.argmin_unsettled(dist1.data(), settled.data(), n) == v->argmin_unsettled(dist2.data(), settled.data(), n));
      const auto gvals = random_vec(g, n, 0, 10);
      CHECK(same_bits(s.max_minus_l1(pts, gvals.data(), src, 0.31), v->max_minus_l1(pts, gvals.data(), src, 0.31)));
    }
  }
}

TEST_CASE("argmin ties go to the lowest index") {
  const KernelTable& s = *kernels_for(Isa::Scalar);
  const std::vector<double> dist = {5, 2, 2, 7, 2, 9, 1, 1, 3};
  std::vector<std::uint8_t> settled(dist.size() + 4, 0);
  CHECK(s.argmin_unsettled(dist.data(), settled.data(), dist.size()) == 6);
  settled[6] = 1;
  CHECK(s.argmin_unsettled(dist.data(), settled.data(), dist.size()) == 7);
  settled[7] = 1;
  CHECK(s.argmin_unsettled(dist.data(), settled.data(), dist.size()) == 1);
  if (const auto* v = kernels_for(Isa::Avx2)) {
    CHECK(v->argmin_unsettled(dist.data(), settled.data(), dist.size()) == 1);
  }
  std::fill(settled.begin(), settled.end(), 1);
  CHECK(s.argmin_unsettled(dist.data(), settled.data(), dist.size()) == dist.size());
}

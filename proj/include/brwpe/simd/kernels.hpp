#pragma once

// Data-parallel inner loops shared by the PAM integrator and the lilypad solver.
//
// Every kernel has a scalar reference implementation and an AVX2 variant; the variant
// is chosen once at runtime from CPUID (override with BRWPE_SIMD=scalar|avx2). Both are
// built without FMA contraction and evaluate each lane in the scalar operation order,
// so the variants agree bit-for-bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace brwpe::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Coordinates of n lattice points stored per dimension (structure of arrays).
struct PointsSoA {
  int d = 0;
  std::size_t n = 0;
  const double* coord[4] = {nullptr, nullptr, nullptr, nullptr};
};

struct KernelTable {
  Isa isa;

  /// out[i] = mask[i] * sum_k in[i + offsets[k]] for i in [begin, end).
  void (*masked_neighbor_sum)(const double* in, double* out, const double* mask, std::size_t begin,
                              std::size_t end, const std::ptrdiff_t* offsets, int n_offsets);

  /// term[i] *= factor; acc[i] += term[i]; returns max_i (term[i] - tol * acc[i]) over
  /// the range, i.e. a value <= 0 means every term is below tol relative to its sum.
  double (*scale_accumulate)(double* acc, double* term, double factor, double tol, std::size_t n);

  /// u[i] *= g[i].
  void (*multiply)(double* u, const double* g, std::size_t n);

  /// u[i] *= c.
  void (*scale)(double* u, double c, std::size_t n);

  /// max_i u[i] (u non-empty).
  double (*max_value)(const double* u, std::size_t n);

  /// max_i |a[i] - b[i]| / (|b[i]| + floor).
  double (*max_weighted_diff)(const double* a, const double* b, double floor, std::size_t n);

  /// dist[i] = min(dist[i], base + w * |p_i - src|_1) for points with settled[i] == 0.
  void (*relax_l1)(const PointsSoA& pts, const double* src, double base, double w, double* dist,
                   const std::uint8_t* settled);

  /// Index of the smallest dist[i] among settled[i] == 0 (lowest index on ties), or n if none.
  std::size_t (*argmin_unsettled)(const double* dist, const std::uint8_t* settled, std::size_t n);

  /// max_i (g[i] - w * |p_i - z|_1).
  double (*max_minus_l1)(const PointsSoA& pts, const double* g, const double* z, double w);
};

/// Kernel table for the best ISA supported by this CPU (respecting BRWPE_SIMD).
const KernelTable& kernels();

/// Kernel table for a specific ISA, or nullptr when it is not compiled in or not supported.
const KernelTable* kernels_for(Isa isa);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not built
}  // namespace detail

}  // namespace brwpe::simd

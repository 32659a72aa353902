#include <cstdlib>
#include <string>

#include "brwpe/simd/kernels.hpp"

namespace brwpe::simd {

#ifndef BRWPE_HAVE_AVX2
namespace detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace detail
#endif

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& select() {
  const char* env = std::getenv("BRWPE_SIMD");
  const std::string want = env ? env : "";
  if (want == "scalar") return detail::scalar_table();
  if (const auto* t = kernels_for(Isa::Avx2)) return *t;
  return detail::scalar_table();
}

}  // namespace

const KernelTable* kernels_for(Isa isa) {
  if (isa == Isa::Scalar) return &detail::scalar_table();
  if (isa == Isa::Avx2 && cpu_has_avx2()) return detail::avx2_table();
  return nullptr;
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace brwpe::simd

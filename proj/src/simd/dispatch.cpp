#include <cstdlib>
#include <string>

#include "statdisc/simd/kernels.hpp"

namespace statdisc::simd {
namespace {

bool cpu_has_avx2() {
#if defined(STATDISC_HAS_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("STATDISC_ISA"); forced && std::string(forced) == "scalar") {
    return detail::scalar_table;
  }
  if (const KernelTable* t = kernels_for(Isa::avx2)) return *t;
  return detail::scalar_table;
}

}  // namespace

const KernelTable* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table;
    case Isa::avx2:
#if defined(STATDISC_HAS_AVX2)
      if (cpu_has_avx2()) return &detail::avx2_table;
#endif
      return nullptr;
  }
  return nullptr;
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace statdisc::simd

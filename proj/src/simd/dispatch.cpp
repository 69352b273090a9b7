#include <cstdlib>
#include <string_view>

#include "siqrng/simd/kernels.hpp"

namespace siqrng::simd {

#if defined(SIQRNG_HAVE_AVX2)
namespace detail {
const Kernels& avx2_table() noexcept;
}
#endif

const Kernels* avx2_kernels() noexcept {
#if defined(SIQRNG_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active() noexcept {
  static const Kernels& chosen = [] () -> const Kernels& {
    const char* forced = std::getenv("SIQRNG_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
    if (const Kernels* k = avx2_kernels()) return *k;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace siqrng::simd

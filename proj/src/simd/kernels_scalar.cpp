#include <bit>

#include "siqrng/simd/kernels.hpp"

namespace siqrng::simd {
namespace {

unsigned gf2_dot_shifted_scalar(const std::uint64_t* seed, std::size_t bit_offset, const std::uint64_t* x,
                                std::size_t n_words) {
  const std::uint64_t* s = seed + (bit_offset >> 6);
  const unsigned shift = bit_offset & 63;
  std::uint64_t acc = 0;
  if (shift == 0) {
    for (std::size_t k = 0; k < n_words; ++k) acc ^= s[k] & x[k];
  } else {
    for (std::size_t k = 0; k < n_words; ++k) {
      const std::uint64_t w = (s[k] >> shift) | (s[k + 1] << (64 - shift));
      acc ^= w & x[k];
    }
  }
  return static_cast<unsigned>(std::popcount(acc) & 1);
}

std::size_t popcount_scalar(const std::uint64_t* words, std::size_t n_words) {
  std::size_t total = 0;
  for (std::size_t k = 0; k < n_words; ++k) total += static_cast<std::size_t>(std::popcount(words[k]));
  return total;
}

void mont_mul_pointwise_scalar(std::uint32_t* a, const std::uint32_t* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] = mont_mul(a[i], b[i]);
}

void dif_butterflies_scalar(std::uint32_t* lo, std::uint32_t* hi, const std::uint32_t* tw, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint32_t u = lo[j];
    const std::uint32_t v = hi[j];
    lo[j] = mod_add(u, v);
    hi[j] = mont_mul(mod_sub(u, v), tw[j]);
  }
}

void dit_butterflies_scalar(std::uint32_t* lo, std::uint32_t* hi, const std::uint32_t* tw, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint32_t u = lo[j];
    const std::uint32_t t = mont_mul(hi[j], tw[j]);
    lo[j] = mod_add(u, t);
    hi[j] = mod_sub(u, t);
  }
}

constexpr Kernels kScalar{
    "scalar",
    &gf2_dot_shifted_scalar,
    &popcount_scalar,
    &mont_mul_pointwise_scalar,
    &dif_butterflies_scalar,
    &dit_butterflies_scalar,
};

}  // namespace

const Kernels& scalar_kernels() noexcept { return kScalar; }

}  // namespace siqrng::simd

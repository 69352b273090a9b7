#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant picked at runtime. Every variant must be bit-identical to the
// scalar table; tests/unit/test_kernels.cpp checks that.

#include <cstddef>
#include <cstdint>

namespace siqrng::simd {

/// NTT-friendly prime 15 * 2^27 + 1; supports power-of-two lengths up to 2^27.
inline constexpr std::uint32_t kPrime = 2013265921u;
inline constexpr std::uint32_t kPrimitiveRoot = 31u;
inline constexpr unsigned kMaxLog2Length = 27;

namespace detail {
constexpr std::uint32_t neg_inverse_mod_2_32(std::uint32_t p) {
  std::uint32_t inv = p;  // Newton: correct to 3 bits for odd p
  for (int i = 0; i < 5; ++i) inv *= 2u - p * inv;
  return 0u - inv;
}
}  // namespace detail

/// -p^{-1} mod 2^32 for Montgomery reduction with R = 2^32.
inline constexpr std::uint32_t kPrimeNegInv = detail::neg_inverse_mod_2_32(kPrime);
inline constexpr std::uint32_t kMontR = static_cast<std::uint32_t>((std::uint64_t{1} << 32) % kPrime);
inline constexpr std::uint32_t kMontR2 =
    static_cast<std::uint32_t>((static_cast<std::uint64_t>(kMontR) * kMontR) % kPrime);

/// a * b * R^{-1} mod p, inputs in [0, p).
constexpr std::uint32_t mont_mul(std::uint32_t a, std::uint32_t b) noexcept {
  const std::uint64_t t = static_cast<std::uint64_t>(a) * b;
  const std::uint32_t m = static_cast<std::uint32_t>(t) * kPrimeNegInv;
  const std::uint32_t u = static_cast<std::uint32_t>((t + static_cast<std::uint64_t>(m) * kPrime) >> 32);
  return u >= kPrime ? u - kPrime : u;
}
constexpr std::uint32_t mod_add(std::uint32_t a, std::uint32_t b) noexcept {
  const std::uint32_t s = a + b;
  return s >= kPrime ? s - kPrime : s;
}
constexpr std::uint32_t mod_sub(std::uint32_t a, std::uint32_t b) noexcept {
  return a >= b ? a - b : a + kPrime - b;
}
constexpr std::uint32_t to_mont(std::uint32_t a) noexcept { return mont_mul(a, kMontR2); }
constexpr std::uint32_t from_mont(std::uint32_t a) noexcept { return mont_mul(a, 1u); }

struct Kernels {
  const char* name;

  /// Parity of popcount(window & x) over n_words words, where window is the
  /// packed bit string `seed` read starting at bit `bit_offset`. `seed` must be
  /// readable up to word (bit_offset / 64 + n_words).
  unsigned (*gf2_dot_shifted)(const std::uint64_t* seed, std::size_t bit_offset, const std::uint64_t* x,
                              std::size_t n_words);

  std::size_t (*popcount)(const std::uint64_t* words, std::size_t n_words);

  /// a[i] = mont_mul(a[i], b[i]).
  void (*mont_mul_pointwise)(std::uint32_t* a, const std::uint32_t* b, std::size_t n);

  /// Decimation-in-frequency butterfly: (lo, hi) <- (lo + hi, (lo - hi) * tw).
  void (*dif_butterflies)(std::uint32_t* lo, std::uint32_t* hi, const std::uint32_t* tw, std::size_t n);

  /// Decimation-in-time butterfly: t = hi * tw; (lo, hi) <- (lo + t, lo - t).
  void (*dit_butterflies)(std::uint32_t* lo, std::uint32_t* hi, const std::uint32_t* tw, std::size_t n);
};

const Kernels& scalar_kernels() noexcept;

/// AVX2 table, or nullptr when not built for x86-64 or the CPU lacks AVX2.
const Kernels* avx2_kernels() noexcept;

/// Best table for this CPU. SIQRNG_SIMD=scalar in the environment forces the
/// scalar reference.
const Kernels& active() noexcept;

}  // namespace siqrng::simd

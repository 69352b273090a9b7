// Compiled with -mavx2 -mpopcnt. Nothing in this file may run before
// dispatch.cpp has confirmed AVX2 support.

#include <immintrin.h>

#include <bit>

#include "siqrng/simd/kernels.hpp"

namespace siqrng::simd::detail {
namespace {

inline __m256i mont_mul8(__m256i a, __m256i b) {
  const __m256i p = _mm256_set1_epi32(static_cast<int>(kPrime));
  const __m256i pinv = _mm256_set1_epi32(static_cast<int>(kPrimeNegInv));
  const __m256i t_even = _mm256_mul_epu32(a, b);
  const __m256i t_odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), _mm256_srli_epi64(b, 32));
  const __m256i m_even = _mm256_mul_epu32(t_even, pinv);
  const __m256i m_odd = _mm256_mul_epu32(t_odd, pinv);
  const __m256i u_even = _mm256_add_epi64(t_even, _mm256_mul_epu32(m_even, p));
  const __m256i u_odd = _mm256_add_epi64(t_odd, _mm256_mul_epu32(m_odd, p));
  const __m256i r = _mm256_blend_epi32(_mm256_srli_epi64(u_even, 32), u_odd, 0xAA);
  return _mm256_min_epu32(r, _mm256_sub_epi32(r, p));
}

inline __m256i add8(__m256i a, __m256i b) {
  const __m256i s = _mm256_add_epi32(a, b);
  return _mm256_min_epu32(s, _mm256_sub_epi32(s, _mm256_set1_epi32(static_cast<int>(kPrime))));
}

inline __m256i sub8(__m256i a, __m256i b) {
  const __m256i d = _mm256_sub_epi32(a, b);
  return _mm256_min_epu32(d, _mm256_add_epi32(d, _mm256_set1_epi32(static_cast<int>(kPrime))));
}

inline __m256i load(const void* p) { return _mm256_loadu_si256(static_cast<const __m256i*>(p)); }
inline void store(void* p, __m256i v) { _mm256_storeu_si256(static_cast<__m256i*>(p), v); }

unsigned gf2_dot_shifted_avx2(const std::uint64_t* seed, std::size_t bit_offset, const std::uint64_t* x,
                              std::size_t n_words) {
  const std::uint64_t* s = seed + (bit_offset >> 6);
  const unsigned shift = bit_offset & 63;
  const __m128i sr = _mm_cvtsi32_si128(static_cast<int>(shift));
  const __m128i sl = _mm_cvtsi32_si128(static_cast<int>(64 - shift));
  __m256i acc = _mm256_setzero_si256();
  std::size_t k = 0;
  for (; k + 4 <= n_words; k += 4) {
    const __m256i w = _mm256_or_si256(_mm256_srl_epi64(load(s + k), sr), _mm256_sll_epi64(load(s + k + 1), sl));
    acc = _mm256_xor_si256(acc, _mm256_and_si256(w, load(x + k)));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t folded = lanes[0] ^ lanes[1] ^ lanes[2] ^ lanes[3];
  for (; k < n_words; ++k) {
    const std::uint64_t w = shift == 0 ? s[k] : (s[k] >> shift) | (s[k + 1] << (64 - shift));
    folded ^= w & x[k];
  }
  return static_cast<unsigned>(std::popcount(folded) & 1);
}

std::size_t popcount_avx2(const std::uint64_t* words, std::size_t n_words) {
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,  //
                                          0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i acc = _mm256_setzero_si256();
  std::size_t k = 0;
  for (; k + 4 <= n_words; k += 4) {
    const __m256i v = load(words + k);
    const __m256i lo = _mm256_and_si256(v, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    const __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, _mm256_setzero_si256()));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::size_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; k < n_words; ++k) total += static_cast<std::size_t>(std::popcount(words[k]));
  return total;
}

void mont_mul_pointwise_avx2(std::uint32_t* a, const std::uint32_t* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) store(a + i, mont_mul8(load(a + i), load(b + i)));
  for (; i < n; ++i) a[i] = mont_mul(a[i], b[i]);
}

void dif_butterflies_avx2(std::uint32_t* lo, std::uint32_t* hi, const std::uint32_t* tw, std::size_t n) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m256i u = load(lo + j);
    const __m256i v = load(hi + j);
    store(lo + j, add8(u, v));
    store(hi + j, mont_mul8(sub8(u, v), load(tw + j)));
  }
  for (; j < n; ++j) {
    const std::uint32_t u = lo[j];
    const std::uint32_t v = hi[j];
    lo[j] = mod_add(u, v);
    hi[j] = mont_mul(mod_sub(u, v), tw[j]);
  }
}

void dit_butterflies_avx2(std::uint32_t* lo, std::uint32_t* hi, const std::uint32_t* tw, std::size_t n) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m256i u = load(lo + j);
    const __m256i t = mont_mul8(load(hi + j), load(tw + j));
    store(lo + j, add8(u, t));
    store(hi + j, sub8(u, t));
  }
  for (; j < n; ++j) {
    const std::uint32_t u = lo[j];
    const std::uint32_t t = mont_mul(hi[j], tw[j]);
    lo[j] = mod_add(u, t);
    hi[j] = mod_sub(u, t);
  }
}

constexpr Kernels kAvx2{
    "avx2",
    &gf2_dot_shifted_avx2,
    &popcount_avx2,
    &mont_mul_pointwise_avx2,
    &dif_butterflies_avx2,
    &dit_butterflies_avx2,
};

}  // namespace

const Kernels& avx2_table() noexcept { return kAvx2; }

}  // namespace siqrng::simd::detail

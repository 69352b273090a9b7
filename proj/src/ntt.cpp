#include "siqrng/ntt.hpp"

#include <stdexcept>

namespace siqrng {

using simd::kPrime;
using simd::mod_add;
using simd::mod_sub;
using simd::mont_mul;

std::uint32_t mod_pow(std::uint32_t a, std::uint64_t e) noexcept {
  std::uint64_t result = 1;
  std::uint64_t base = a % kPrime;
  while (e > 0) {
    if (e & 1) result = result * base % kPrime;
    base = base * base % kPrime;
    e >>= 1;
  }
  return static_cast<std::uint32_t>(result);
}

NttPlan::NttPlan(unsigned log2_length, const simd::Kernels& kernels)
    : log2_length_(log2_length), kernels_(&kernels) {
  if (log2_length == 0 || log2_length > simd::kMaxLog2Length) throw std::invalid_argument("NttPlan: unsupported length");
  const std::size_t n = size();
  forward_twiddles_.assign(n, 0);
  inverse_twiddles_.assign(n, 0);
  for (std::size_t h = 1; h < n; h <<= 1) {
    const std::uint32_t root = mod_pow(simd::kPrimitiveRoot, (kPrime - 1) / (2 * h));
    const std::uint32_t inv_root = mod_pow(root, kPrime - 2);
    std::uint64_t w = 1;
    std::uint64_t wi = 1;
    for (std::size_t j = 0; j < h; ++j) {
      forward_twiddles_[h + j] = simd::to_mont(static_cast<std::uint32_t>(w));
      inverse_twiddles_[h + j] = simd::to_mont(static_cast<std::uint32_t>(wi));
      w = w * root % kPrime;
      wi = wi * inv_root % kPrime;
    }
  }
}

void NttPlan::forward(std::span<std::uint32_t> a) const {
  const std::size_t n = size();
  if (a.size() != n) throw std::invalid_argument("NttPlan::forward: size mismatch");
  for (std::size_t h = n >> 1; h >= 1; h >>= 1) {
    const std::uint32_t* tw = forward_twiddles_.data() + h;
    for (std::size_t s = 0; s < n; s += 2 * h) {
      if (h >= 8) {
        kernels_->dif_butterflies(a.data() + s, a.data() + s + h, tw, h);
        continue;
      }
      for (std::size_t j = 0; j < h; ++j) {
        const std::uint32_t u = a[s + j];
        const std::uint32_t v = a[s + j + h];
        a[s + j] = mod_add(u, v);
        a[s + j + h] = mont_mul(mod_sub(u, v), tw[j]);
      }
    }
    if (h == 1) break;
  }
}

void NttPlan::inverse(std::span<std::uint32_t> a) const {
  const std::size_t n = size();
  if (a.size() != n) throw std::invalid_argument("NttPlan::inverse: size mismatch");
  for (std::size_t h = 1; h < n; h <<= 1) {
    const std::uint32_t* tw = inverse_twiddles_.data() + h;
    for (std::size_t s = 0; s < n; s += 2 * h) {
      if (h >= 8) {
        kernels_->dit_butterflies(a.data() + s, a.data() + s + h, tw, h);
        continue;
      }
      for (std::size_t j = 0; j < h; ++j) {
        const std::uint32_t u = a[s + j];
        const std::uint32_t t = mont_mul(a[s + j + h], tw[j]);
        a[s + j] = mod_add(u, t);
        a[s + j + h] = mod_sub(u, t);
      }
    }
  }
}

std::vector<std::uint32_t> NttPlan::convolve_bits(const BitVector& a, const BitVector& b,
                                                  std::size_t first, std::size_t count) const {
  const std::size_t n = size();
  if (a.size() > n || b.size() > n || first + count > n) throw std::invalid_argument("convolve_bits: too long");
  const std::uint32_t one = simd::kMontR;
  std::vector<std::uint32_t> fa(n, 0);
  std::vector<std::uint32_t> fb(n, 0);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a.get(i) ? one : 0;
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b.get(i) ? one : 0;
  forward(fa);
  forward(fb);
  kernels_->mont_mul_pointwise(fa.data(), fb.data(), n);
  fb.clear();
  fb.shrink_to_fit();
  inverse(fa);
  // fa holds n * c * R; multiplying by the plain n^{-1} in Montgomery form drops both.
  const std::uint32_t n_inv = mod_pow(static_cast<std::uint32_t>(n % kPrime), kPrime - 2);
  std::vector<std::uint32_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = mont_mul(fa[first + i], n_inv);
  return out;
}

}  // namespace siqrng

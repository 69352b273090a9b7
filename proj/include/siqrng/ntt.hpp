#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "siqrng/bits.hpp"
#include "siqrng/simd/kernels.hpp"

namespace siqrng {

/// Power-of-two number-theoretic transform over GF(simd::kPrime), values in
/// Montgomery form. forward() leaves its output in bit-reversed order and
/// inverse() expects that order, which is all a convolution needs.
class NttPlan {
public:
  explicit NttPlan(unsigned log2_length, const simd::Kernels& kernels = simd::active());

  std::size_t size() const noexcept { return std::size_t{1} << log2_length_; }

  void forward(std::span<std::uint32_t> a) const;
  /// Unscaled: multiplies every value by size() relative to the true inverse.
  void inverse(std::span<std::uint32_t> a) const;

  /// Cyclic convolution of two {0,1} sequences; returns exact integer
  /// coefficients for indices [first, first + count). Inputs are padded to size().
  std::vector<std::uint32_t> convolve_bits(const BitVector& a, const BitVector& b,
                                           std::size_t first, std::size_t count) const;

private:
  unsigned log2_length_;
  const simd::Kernels* kernels_;
  std::vector<std::uint32_t> forward_twiddles_;  // [h + j] = w_{2h}^j
  std::vector<std::uint32_t> inverse_twiddles_;
};

/// a^e mod p on plain (non-Montgomery) values.
std::uint32_t mod_pow(std::uint32_t a, std::uint64_t e) noexcept;

}  // namespace siqrng

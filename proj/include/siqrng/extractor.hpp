#pragma once

// Toeplitz-matrix hashing over GF(2). The m x n matrix is
// T[i][j] = seed[i - j + n - 1], built from n + m - 1 seed bits.

#include <cstddef>
#include <cstdint>

#include "siqrng/bits.hpp"
#include "siqrng/protocol_math.hpp"
#include "siqrng/simd/kernels.hpp"

namespace siqrng::extractor {

struct ToeplitzSpec {
  std::size_t input_len = 0;   ///< n
  std::size_t output_len = 0;  ///< m
  BitVector seed;              ///< exactly n + m - 1 bits

  std::size_t seed_len() const noexcept { return input_len + output_len - 1; }
  /// Throws LengthMismatch on m > n, m == 0 or a wrong seed length.
  void validate() const;
};

/// Bit-by-bit reference.
BitVector toeplitz_naive(const ToeplitzSpec& spec, const BitVector& input);

/// Rows [first_row, first_row + count) of the naive product.
BitVector toeplitz_naive_window(const ToeplitzSpec& spec, const BitVector& input, std::size_t first_row,
                                std::size_t count);

/// Word-parallel product: each row is a shifted window of the reversed seed,
/// dotted with the input via the SIMD GF(2) kernel. O(n m / 64).
BitVector toeplitz_blockwise(const ToeplitzSpec& spec, const BitVector& input,
                             const simd::Kernels& kernels = simd::active());

enum class FastPath { ntt, blockwise };

/// Whether the exact NTT path can carry this shape: convolution length
/// next_pow2(n + m - 1) within 2^27 and every coefficient (at most n) below p.
bool ntt_path_available(std::size_t n, std::size_t m) noexcept;

/// Same output as toeplitz_naive. Uses a cyclic convolution over GF(p) of
/// length >= n + m - 1, reduced mod 2; falls back to toeplitz_blockwise when
/// ntt_path_available() is false. `used` reports the path taken.
BitVector toeplitz_fast(const ToeplitzSpec& spec, const BitVector& input, FastPath* used = nullptr,
                        const simd::Kernels& kernels = simd::active());

struct Extraction {
  BitVector bits;
  ToeplitzSpec spec;  ///< kept for audit, including the seed consumed
};

/// Hashes the raw block down to floor(R_final) bits using the first
/// n + m - 1 bits of `seed_source`. Throws EstimationAbort when floor(R_final)
/// is 0 or negative and LengthMismatch when the seed is too short.
Extraction extract(const BitVector& raw_block, const protocol::RateBreakdown& rates, const BitVector& seed_source);

}  // namespace siqrng::extractor

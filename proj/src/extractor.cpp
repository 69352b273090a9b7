#include "siqrng/extractor.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "siqrng/errors.hpp"
#include "siqrng/ntt.hpp"

namespace siqrng::extractor {
namespace {

void check_input(const ToeplitzSpec& spec, const BitVector& input) {
  spec.validate();
  if (input.size() != spec.input_len)
    throw LengthMismatch("toeplitz: input has " + std::to_string(input.size()) + " bits, expected " +
                         std::to_string(spec.input_len));
}

unsigned convolution_log2(std::size_t n, std::size_t m) {
  const std::size_t len = n + m - 1;
  return static_cast<unsigned>(std::bit_width(std::bit_ceil(len)) - 1);
}

}  // namespace

void ToeplitzSpec::validate() const {
  if (output_len == 0) throw LengthMismatch("toeplitz: output length must be positive");
  if (output_len > input_len) throw LengthMismatch("toeplitz: output length exceeds input length");
  if (seed.size() != seed_len())
    throw LengthMismatch("toeplitz: seed has " + std::to_string(seed.size()) + " bits, expected " +
                         std::to_string(seed_len()));
}

BitVector toeplitz_naive_window(const ToeplitzSpec& spec, const BitVector& input, std::size_t first_row,
                                std::size_t count) {
  check_input(spec, input);
  if (first_row + count > spec.output_len) throw LengthMismatch("toeplitz window outside the output");
  const std::size_t n = spec.input_len;
  std::vector<std::uint8_t> seed(spec.seed_len());
  std::vector<std::uint8_t> x(n);
  for (std::size_t k = 0; k < seed.size(); ++k) seed[k] = spec.seed.get(k);
  for (std::size_t j = 0; j < n; ++j) x[j] = input.get(j);
  BitVector out(count);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t i = first_row + r;
    std::uint8_t acc = 0;
    for (std::size_t j = 0; j < n; ++j) acc ^= seed[i + n - 1 - j] & x[j];
    out.set(r, acc != 0);
  }
  return out;
}

BitVector toeplitz_naive(const ToeplitzSpec& spec, const BitVector& input) {
  return toeplitz_naive_window(spec, input, 0, spec.output_len);
}

BitVector toeplitz_blockwise(const ToeplitzSpec& spec, const BitVector& input, const simd::Kernels& kernels) {
  check_input(spec, input);
  const std::size_t n = spec.input_len;
  const std::size_t m = spec.output_len;
  const std::size_t len = spec.seed_len();
  // reversed[k] = seed[len - 1 - k]; row i is reversed[m - 1 - i .. m - 1 - i + n).
  BitVector reversed(len);
  for (std::size_t k = 0; k < len; ++k)
    if (spec.seed.get(len - 1 - k)) reversed.set(k, true);
  const std::size_t n_words = BitVector::word_count(n);
  BitVector out(m);
  for (std::size_t i = 0; i < m; ++i)
    if (kernels.gf2_dot_shifted(reversed.guarded_data(), m - 1 - i, input.guarded_data(), n_words)) out.set(i, true);
  return out;
}

bool ntt_path_available(std::size_t n, std::size_t m) noexcept {
  if (n == 0 || m == 0) return false;
  const std::size_t len = n + m - 1;
  if (len > (std::size_t{1} << simd::kMaxLog2Length)) return false;
  // Largest coefficient read back is a sum of n products of bits.
  return n < simd::kPrime;
}

BitVector toeplitz_fast(const ToeplitzSpec& spec, const BitVector& input, FastPath* used,
                        const simd::Kernels& kernels) {
  check_input(spec, input);
  const std::size_t n = spec.input_len;
  const std::size_t m = spec.output_len;
  if (!ntt_path_available(n, m)) {
    if (used) *used = FastPath::blockwise;
    return toeplitz_blockwise(spec, input, kernels);
  }
  if (used) *used = FastPath::ntt;
  // output[i] = (seed * input)[i + n - 1]; a cyclic length >= n + m - 1 leaves
  // those indices free of wrap-around terms.
  const NttPlan plan(std::max(1u, convolution_log2(n, m)), kernels);
  const std::vector<std::uint32_t> coeffs = plan.convolve_bits(spec.seed, input, n - 1, m);
  BitVector out(m);
  for (std::size_t i = 0; i < m; ++i)
    if (coeffs[i] & 1u) out.set(i, true);
  return out;
}

Extraction extract(const BitVector& raw_block, const protocol::RateBreakdown& rates, const BitVector& seed_source) {
  if (!(rates.r_final >= 1.0))
    throw EstimationAbort("no certified randomness: R_final = " + std::to_string(rates.r_final));
  const auto m = static_cast<std::size_t>(std::floor(rates.r_final));
  const std::size_t n = raw_block.size();
  if (m > n) throw LengthMismatch("extract: R_final exceeds the raw block length");
  Extraction result;
  result.spec.input_len = n;
  result.spec.output_len = m;
  const std::size_t need = result.spec.seed_len();
  if (seed_source.size() < need)
    throw LengthMismatch("extract: seed has " + std::to_string(seed_source.size()) + " bits, need " +
                         std::to_string(need));
  result.spec.seed = seed_source.size() == need ? seed_source : seed_source.slice(0, need);
  result.bits = toeplitz_fast(result.spec, raw_block);
  return result;
}

}  // namespace siqrng::extractor

#include "siqrng/bits.hpp"

#include <bit>
#include <stdexcept>

#include "siqrng/simd/kernels.hpp"

namespace siqrng {

BitVector BitVector::from_bools(std::span<const std::uint8_t> bits) {
  BitVector out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.set(i, true);
  return out;
}

BitVector BitVector::from_bytes_msb(std::span<const std::uint8_t> bytes, std::size_t n_bits) {
  if (n_bits > bytes.size() * 8) throw std::invalid_argument("from_bytes_msb: not enough bytes");
  BitVector out(n_bits);
  for (std::size_t i = 0; i < n_bits; ++i)
    if ((bytes[i >> 3] >> (7 - (i & 7))) & 1u) out.set(i, true);
  return out;
}

void BitVector::push_back(bool v) {
  if (word_count(size_ + 1) + 1 > words_.size()) words_.push_back(0);
  ++size_;
  set(size_ - 1, v);
}

std::size_t BitVector::popcount() const noexcept {
  return simd::active().popcount(words().data(), words().size());
}

std::vector<std::uint8_t> BitVector::to_bytes_msb() const {
  std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
  for (std::size_t i = 0; i < size_; ++i)
    if (get(i)) out[i >> 3] |= static_cast<std::uint8_t>(0x80u >> (i & 7));
  return out;
}

BitVector BitVector::slice(std::size_t first, std::size_t count) const {
  if (first + count > size_) throw std::out_of_range("BitVector::slice");
  BitVector out(count);
  const unsigned shift = first & 63;
  const std::size_t base = first >> 6;
  for (std::size_t w = 0; w < word_count(count); ++w) {
    std::uint64_t lo = words_[base + w] >> shift;
    if (shift != 0 && base + w + 1 < words_.size()) lo |= words_[base + w + 1] << (64 - shift);
    out.words_[w] = lo;
  }
  out.clear_tail();
  return out;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.size_ != size_) throw std::invalid_argument("BitVector xor: size mismatch");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  return *this;
}

void BitVector::clear_tail() noexcept {
  const std::size_t full = word_count(size_);
  if (size_ & 63) words_[full - 1] &= (std::uint64_t{1} << (size_ & 63)) - 1;
  for (std::size_t w = full; w < words_.size(); ++w) words_[w] = 0;
}

}  // namespace siqrng

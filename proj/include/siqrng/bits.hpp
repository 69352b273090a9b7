#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace siqrng {

/**
 * Packed bit string. Bit k lives in word k/64 at position k%64 (LSB first).
 * Bits past size() in the last word are always zero, and one extra zero word
 * is kept at the end so shifted word reads never step outside the buffer.
 */
class BitVector {
public:
  BitVector() : words_(1, 0) {}
  explicit BitVector(std::size_t n_bits) : size_(n_bits), words_(word_count(n_bits) + 1, 0) {}

  static BitVector from_bools(std::span<const std::uint8_t> bits);
  /// Bytes read most-significant bit first; takes the first n_bits.
  static BitVector from_bytes_msb(std::span<const std::uint8_t> bytes, std::size_t n_bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }
  void push_back(bool v);

  /// Words covering size() bits (excludes the guard word).
  std::span<const std::uint64_t> words() const noexcept { return {words_.data(), word_count(size_)}; }
  std::span<std::uint64_t> words() noexcept { return {words_.data(), word_count(size_)}; }
  /// Pointer valid for word_count(size()) + 1 reads.
  const std::uint64_t* guarded_data() const noexcept { return words_.data(); }

  std::size_t popcount() const noexcept;
  std::vector<std::uint8_t> to_bytes_msb() const;
  BitVector slice(std::size_t first, std::size_t count) const;

  BitVector& operator^=(const BitVector& other);
  friend bool operator==(const BitVector& a, const BitVector& b) noexcept {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }

  static constexpr std::size_t word_count(std::size_t n_bits) noexcept { return (n_bits + 63) / 64; }

private:
  void clear_tail() noexcept;

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace siqrng

#pragma once

#include <cstdint>
#include <limits>

namespace siqrng {

/// Independent sub-streams derived from one (seed, index) key.
enum class Stream : std::uint64_t {
  basis = 1,
  source = 2,
  detector = 3,
  test = 4,
};

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/**
 * Counter-based generator: the output sequence is a pure function of
 * (seed, index, stream). Any pulse can be regenerated in isolation, which is
 * what makes chunked simulation bit-identical to the serial run.
 *
 * Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
 */
class CounterRng {
public:
  using result_type = std::uint64_t;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t index, Stream stream) noexcept
      : state_(splitmix64_mix(splitmix64_mix(seed + 0x9E3779B97F4A7C15ULL) ^
                              splitmix64_mix(index * 0xD1B54A32D192ED03ULL +
                                             static_cast<std::uint64_t>(stream)))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

}  // namespace siqrng

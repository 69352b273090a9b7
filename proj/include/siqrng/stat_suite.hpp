#pragma once

// Randomness test battery after NIST SP 800-22: monobit, block frequency,
// runs, longest run of ones, cumulative sums, serial, approximate entropy and
// the discrete Fourier transform test. Parameters follow the published
// defaults (block 128, serial and ApEn m = 2, forward cusum).

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "siqrng/bits.hpp"

namespace siqrng::stats {

inline constexpr double kDefaultAlpha = 0.01;
inline constexpr std::size_t kBatteryMinBits = 1'000'000;

struct TestReport {
  std::string test_name;
  double p_value = 0.0;
  bool pass = false;
  std::size_t n_bits_used = 0;
};

double monobit(const BitVector& bits);
double block_frequency(const BitVector& bits, std::size_t block_len = 128);
double runs(const BitVector& bits);
double longest_run_of_ones(const BitVector& bits);
double cumulative_sums(const BitVector& bits);
double serial(const BitVector& bits, unsigned m = 2);
double approximate_entropy(const BitVector& bits, unsigned m = 2);
double spectral_dft(const BitVector& bits);

/// Smallest input each test accepts; shorter input throws InsufficientBits.
struct TestSpec {
  const char* name;
  std::size_t min_bits;
};
const std::vector<TestSpec>& battery_tests();

/// Runs all eight tests. Requires kBatteryMinBits bits.
std::vector<TestReport> run_battery(const BitVector& bits, double alpha = kDefaultAlpha);

std::size_t count_failures(const std::vector<TestReport>& reports);

/// CSV with header `test,p_value,pass`.
void write_report_csv(std::ostream& os, const std::vector<TestReport>& reports);

/// P(longest run of ones in an m-bit block <= r) for uniform bits.
double prob_longest_run_at_most(std::size_t m, std::size_t r);

}  // namespace siqrng::stats

#include "siqrng/stat_suite.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>

#include "siqrng/errors.hpp"

namespace siqrng::stats {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double igamc(double a, double x) { return x <= 0.0 ? 1.0 : boost::math::gamma_q(a, x); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

void require_bits(const BitVector& bits, std::size_t min_bits, const char* test) {
  if (bits.size() < min_bits)
    throw InsufficientBits(std::string(test) + ": needs at least " + std::to_string(min_bits) + " bits, got " +
                           std::to_string(bits.size()));
}

/// Overlapping len-bit pattern counts with wrap-around, as in the serial and
/// approximate entropy tests. Pattern value is MSB-first over the window.
std::vector<std::uint64_t> pattern_counts(const BitVector& bits, unsigned len) {
  std::vector<std::uint64_t> counts(std::size_t{1} << len, 0);
  if (len == 0) {
    counts[0] = bits.size();
    return counts;
  }
  const std::size_t n = bits.size();
  const std::uint32_t mask = (1u << len) - 1u;
  std::uint32_t window = 0;
  for (unsigned k = 0; k + 1 < len; ++k) window = (window << 1) | static_cast<std::uint32_t>(bits.get(k % n));
  for (std::size_t i = 0; i < n; ++i) {
    window = ((window << 1) | static_cast<std::uint32_t>(bits.get((i + len - 1) % n))) & mask;
    ++counts[window];
  }
  return counts;
}

double psi_squared(const BitVector& bits, unsigned m) {
  if (m == 0) return 0.0;
  const double n = static_cast<double>(bits.size());
  double sum = 0.0;
  for (const auto c : pattern_counts(bits, m)) sum += static_cast<double>(c) * static_cast<double>(c);
  return std::ldexp(sum, static_cast<int>(m)) / n - n;
}

double phi(const BitVector& bits, unsigned m) {
  if (m == 0) return 0.0;
  const double n = static_cast<double>(bits.size());
  double sum = 0.0;
  for (const auto c : pattern_counts(bits, m)) {
    if (c == 0) continue;
    const double pi = static_cast<double>(c) / n;
    sum += pi * std::log(pi);
  }
  return sum;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double monobit(const BitVector& bits) {
  require_bits(bits, 100, "monobit");
  const double n = static_cast<double>(bits.size());
  const double sum = 2.0 * static_cast<double>(bits.popcount()) - n;
  return std::erfc(std::abs(sum) / std::sqrt(n) / kSqrt2);
}

double block_frequency(const BitVector& bits, std::size_t block_len) {
  require_bits(bits, std::max<std::size_t>(100, block_len), "block_frequency");
  const std::size_t blocks = bits.size() / block_len;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < block_len; ++j) ones += bits.get(b * block_len + j);
    const double pi = static_cast<double>(ones) / static_cast<double>(block_len) - 0.5;
    chi2 += pi * pi;
  }
  chi2 *= 4.0 * static_cast<double>(block_len);
  return igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
}

double runs(const BitVector& bits) {
  require_bits(bits, 100, "runs");
  const std::size_t n = bits.size();
  const double nd = static_cast<double>(n);
  const double pi = static_cast<double>(bits.popcount()) / nd;
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nd)) return 0.0;  // frequency prerequisite failed
  std::size_t v = 1;
  for (std::size_t i = 1; i < n; ++i) v += bits.get(i) != bits.get(i - 1);
  const double expected = 2.0 * nd * pi * (1.0 - pi);
  return std::erfc(std::abs(static_cast<double>(v) - expected) / (2.0 * std::sqrt(2.0 * nd) * pi * (1.0 - pi)));
}

double prob_longest_run_at_most(std::size_t m, std::size_t r) {
  if (r >= m) return 1.0;
  // state j: current trailing run of ones has length j (< r + 1)
  std::vector<double> dp(r + 1, 0.0);
  dp[0] = 1.0;
  std::vector<double> next(r + 1);
  for (std::size_t i = 0; i < m; ++i) {
    double total = 0.0;
    for (const double p : dp) total += p;
    next[0] = 0.5 * total;
    for (std::size_t j = 1; j <= r; ++j) next[j] = 0.5 * dp[j - 1];
    dp.swap(next);
  }
  double total = 0.0;
  for (const double p : dp) total += p;
  return total;
}

double longest_run_of_ones(const BitVector& bits) {
  require_bits(bits, 128, "longest_run_of_ones");
  const std::size_t n = bits.size();
  std::size_t block_len;
  std::size_t lo;  // first class is "<= lo"
  std::size_t classes;
  if (n < 6272) {
    block_len = 8, lo = 1, classes = 4;
  } else if (n < 750000) {
    block_len = 128, lo = 4, classes = 6;
  } else {
    block_len = 10000, lo = 10, classes = 7;
  }
  std::vector<double> pi(classes);
  double prev = 0.0;
  for (std::size_t k = 0; k + 1 < classes; ++k) {
    const double cdf = prob_longest_run_at_most(block_len, lo + k);
    pi[k] = cdf - prev;
    prev = cdf;
  }
  pi[classes - 1] = 1.0 - prev;

  const std::size_t blocks = n / block_len;
  std::vector<std::size_t> observed(classes, 0);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t longest = 0;
    std::size_t run = 0;
    for (std::size_t j = 0; j < block_len; ++j) {
      run = bits.get(b * block_len + j) ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    const std::size_t cls = longest <= lo ? 0 : std::min(classes - 1, longest - lo);
    ++observed[cls];
  }
  double chi2 = 0.0;
  for (std::size_t k = 0; k < classes; ++k) {
    const double expected = static_cast<double>(blocks) * pi[k];
    const double diff = static_cast<double>(observed[k]) - expected;
    chi2 += diff * diff / expected;
  }
  return igamc(static_cast<double>(classes - 1) / 2.0, chi2 / 2.0);
}

double cumulative_sums(const BitVector& bits) {
  require_bits(bits, 100, "cumulative_sums");
  const std::int64_t n = static_cast<std::int64_t>(bits.size());
  std::int64_t s = 0;
  std::int64_t z = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    s += bits.get(static_cast<std::size_t>(i)) ? 1 : -1;
    z = std::max(z, s < 0 ? -s : s);
  }
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double zd = static_cast<double>(z);
  const std::int64_t ratio = n / z;
  double sum1 = 0.0;
  for (std::int64_t k = (-ratio + 1) / 4; k <= (ratio - 1) / 4; ++k)
    sum1 += normal_cdf((4.0 * k + 1.0) * zd / sqrt_n) - normal_cdf((4.0 * k - 1.0) * zd / sqrt_n);
  double sum2 = 0.0;
  for (std::int64_t k = (-ratio - 3) / 4; k <= (ratio - 1) / 4; ++k)
    sum2 += normal_cdf((4.0 * k + 3.0) * zd / sqrt_n) - normal_cdf((4.0 * k + 1.0) * zd / sqrt_n);
  return std::clamp(1.0 - sum1 + sum2, 0.0, 1.0);
}

double serial(const BitVector& bits, unsigned m) {
  if (m < 2 || m > 16) throw DomainError("serial: m must lie in [2, 16]");
  require_bits(bits, 100, "serial");
  const double del = psi_squared(bits, m) - psi_squared(bits, m - 1);
  return igamc(std::ldexp(1.0, static_cast<int>(m) - 2), del / 2.0);
}

double approximate_entropy(const BitVector& bits, unsigned m) {
  if (m < 1 || m > 16) throw DomainError("approximate_entropy: m must lie in [1, 16]");
  require_bits(bits, 100, "approximate_entropy");
  const double n = static_cast<double>(bits.size());
  const double apen = phi(bits, m) - phi(bits, m + 1);
  const double chi2 = 2.0 * n * (std::numbers::ln2 - apen);
  return igamc(std::ldexp(1.0, static_cast<int>(m) - 1), chi2 / 2.0);
}

double spectral_dft(const BitVector& bits) {
  require_bits(bits, 1000, "spectral_dft");
  const std::size_t n = bits.size();
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) in[i] = bits.get(i) ? 1.0 : -1.0;
  fftw_execute(plan);
  const double nd = static_cast<double>(n);
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * nd);
  std::size_t below = 0;
  for (std::size_t j = 0; j < n / 2; ++j)
    if (std::hypot(out[j][0], out[j][1]) < threshold) ++below;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  const double expected = 0.95 * nd / 2.0;
  const double d = (static_cast<double>(below) - expected) / std::sqrt(nd * 0.95 * 0.05 / 4.0);
  return std::erfc(std::abs(d) / kSqrt2);
}

const std::vector<TestSpec>& battery_tests() {
  static const std::vector<TestSpec> specs{
      {"monobit", 100},          {"block_frequency", 128}, {"runs", 100},   {"longest_run", 128},
      {"cumulative_sums", 100},  {"serial", 100},          {"approximate_entropy", 100},
      {"spectral_dft", 1000},
  };
  return specs;
}

std::vector<TestReport> run_battery(const BitVector& bits, double alpha) {
  if (bits.size() < kBatteryMinBits)
    throw InsufficientBits("run_battery: needs at least " + std::to_string(kBatteryMinBits) + " bits, got " +
                           std::to_string(bits.size()));
  const std::size_t n = bits.size();
  const std::array<double, 8> p{
      monobit(bits),          block_frequency(bits), runs(bits),   longest_run_of_ones(bits),
      cumulative_sums(bits),  serial(bits),          approximate_entropy(bits), spectral_dft(bits),
  };
  const std::array<std::size_t, 8> used{n, n / 128 * 128, n, n / 10000 * 10000, n, n, n, n};
  std::vector<TestReport> reports;
  for (std::size_t i = 0; i < p.size(); ++i)
    reports.push_back({battery_tests()[i].name, p[i], p[i] >= alpha, used[i]});
  return reports;
}

std::size_t count_failures(const std::vector<TestReport>& reports) {
  return static_cast<std::size_t>(std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.pass; }));
}

void write_report_csv(std::ostream& os, const std::vector<TestReport>& reports) {
  os << "test,p_value,pass\n";
  char buf[64];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%.10g", r.p_value);
    os << r.test_name << ',' << buf << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

}  // namespace siqrng::stats

#include "siqrng/protocol_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "siqrng/errors.hpp"

namespace siqrng::protocol {
namespace {

constexpr double kMinOverlap = std::numbers::sqrt2 / 2.0;

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

void require_probability(double x, const char* what) {
  if (!is_probability(x)) throw DomainError(std::string(what) + " must lie in [0, 1], got " + std::to_string(x));
}

// log2(2^a + 2^b)
double log2_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp2(b - a)) / std::numbers::ln2;
}

}  // namespace

double TallySummary::error_rate_x() const {
  if (n_x == 0) throw EmptyTallyError("no detected X-basis events; cannot estimate e_bX");
  return (static_cast<double>(x_wrong_singles) + 0.5 * static_cast<double>(x_doubles)) / static_cast<double>(n_x);
}

double TallySummary::detected_ratio_x() const {
  const std::uint64_t n = n_x + n_z;
  if (n == 0) throw EmptyTallyError("no detected events");
  return static_cast<double>(n_x) / static_cast<double>(n);
}

double SamplingBound::raw() const noexcept { return std::exp2(log2_raw); }
double SamplingBound::clamped() const noexcept { return std::exp2(log2_clamped()); }

double binary_entropy(double x) {
  require_probability(x, "binary_entropy argument");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log1p(-x) / std::numbers::ln2;
}

double xi_theta(double e_bx, double theta, double q_x) {
  require_probability(e_bx, "e_bX");
  require_probability(theta, "theta");
  require_probability(q_x, "q_X");
  if (e_bx + theta > 1.0) throw DomainError("xi_theta: e_bX + theta exceeds 1");
  if (theta == 0.0) return 0.0;
  const double shifted = binary_entropy(e_bx + theta);
  // Grouped as two differences so small theta does not cancel catastrophically.
  const double value = (binary_entropy(e_bx + theta - q_x * theta) - shifted) + q_x * (shifted - binary_entropy(e_bx));
  return std::max(0.0, value);
}

SamplingBound epsilon_theta_bound(double n, double q_x, double e_bx, double theta) {
  if (!(n > 0.0)) throw DomainError("epsilon_theta_bound: n must be positive");
  if (!(q_x > 0.0 && q_x < 1.0)) throw DomainError("epsilon_theta_bound: q_X must lie in (0, 1)");
  if (!(e_bx > 0.0 && e_bx < 1.0)) throw DomainError("epsilon_theta_bound: e_bX must lie in (0, 1)");
  SamplingBound b;
  b.xi = xi_theta(e_bx, theta, q_x);
  b.log2_raw = -0.5 * std::log2(q_x * (1.0 - q_x) * e_bx * (1.0 - e_bx) * n) - n * b.xi;
  return b;
}

double regularized_error_rate(double e_bx, double n_x) {
  if (!(n_x > 0.0)) throw EmptyTallyError("regularized_error_rate: n_X must be positive");
  return std::max(e_bx, 0.5 / n_x);
}

double solve_theta_log2(double n, double q_x, double e_bx, double log2_target) {
  if (!(log2_target < 0.0)) {
    // target >= 1: theta = 0 works whenever the raw prefactor is already <= target.
    if (epsilon_theta_bound(n, q_x, e_bx, 0.0).log2_raw <= log2_target) return 0.0;
  }
  auto ok = [&](std::int64_t k) {
    return epsilon_theta_bound(n, q_x, e_bx, static_cast<double>(k) * kThetaGridStep).log2_raw <= log2_target;
  };
  const auto k_max = static_cast<std::int64_t>(std::floor((1.0 - e_bx) / kThetaGridStep + 1e-9));
  if (ok(0)) return 0.0;
  if (k_max <= 0 || !ok(k_max)) throw UnreachableTarget("solve_theta: target epsilon unreachable for any theta");
  std::int64_t lo = 0;  // fails
  std::int64_t hi = k_max;  // passes
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return static_cast<double>(hi) * kThetaGridStep;
}

double solve_theta(double n, double q_x, double e_bx, double target_epsilon) {
  if (!(target_epsilon > 0.0 && target_epsilon <= 1.0)) throw DomainError("solve_theta: target must lie in (0, 1]");
  return solve_theta_log2(n, q_x, e_bx, std::log2(target_epsilon));
}

double randomness_length_ideal(double n_z, double e_bx, double theta, double t_e) {
  return n_z - n_z * binary_entropy(e_bx + theta) - t_e;
}

double randomness_coefficient(double overlap_c) {
  if (!(overlap_c >= kMinOverlap - 1e-15 && overlap_c <= 1.0))
    throw DomainError("overlap_c must lie in [1/sqrt(2), 1]");
  return std::clamp(-2.0 * std::log2(overlap_c), 0.0, 1.0);
}

double randomness_length_imperfect(double n_z, double e_bx, double theta, double t_e, double overlap_c) {
  return randomness_coefficient(overlap_c) * n_z - n_z * binary_entropy(e_bx + theta) - t_e;
}

double efficiency_rescale(double eta0, double eta1) {
  if (!(eta0 > 0.0 && eta0 <= 1.0 && eta1 > 0.0 && eta1 <= 1.0))
    throw DomainError("detector efficiencies must lie in (0, 1]");
  return 2.0 * std::min(eta0, eta1) / (eta0 + eta1);
}

double randomness_length_final(double n_z, double e_bx, double theta, double t_e, double overlap_c, double eta0,
                               double eta1) {
  return efficiency_rescale(eta0, eta1) * randomness_length_imperfect(n_z, e_bx, theta, t_e, overlap_c);
}

RateBreakdown rate_breakdown(double n_z, double e_bx, double theta, double t_e, double overlap_c, double eta0,
                             double eta1) {
  RateBreakdown r;
  r.coefficient = randomness_coefficient(overlap_c);
  r.rescale_factor = efficiency_rescale(eta0, eta1);
  r.entropy_cost = n_z * binary_entropy(e_bx + theta);
  r.r0 = n_z - r.entropy_cost - t_e;
  r.r1 = r.coefficient * n_z - r.entropy_cost - t_e;
  r.r_final = r.rescale_factor * r.r1;
  return r;
}

double failure_probability(double epsilon_theta, double t_e) {
  require_probability(epsilon_theta, "epsilon_theta");
  if (!(t_e >= 0.0)) throw DomainError("t_e must be non-negative");
  const double s = std::min(1.0, epsilon_theta + std::exp2(-t_e));
  return std::sqrt(s * (2.0 - s));
}

double failure_probability_log2(double log2_epsilon_theta, double t_e) {
  if (!(t_e >= 0.0)) throw DomainError("t_e must be non-negative");
  if (log2_epsilon_theta > 0.0) throw DomainError("log2 epsilon_theta must be <= 0");
  const double log2_s = std::min(0.0, log2_add(log2_epsilon_theta, -t_e));
  const double s = std::exp2(log2_s);
  return 0.5 * (log2_s + 1.0 + std::log1p(-0.5 * s) / std::numbers::ln2);
}

double ZPrimeGate::extinction_db() const {
  const auto hi = std::max(counts_d0, counts_d1);
  const auto lo = std::min(counts_d0, counts_d1);
  if (hi == 0) return 0.0;
  if (lo == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(hi) / static_cast<double>(lo));
}

OverlapCalibration overlap_bound_from_calibration(const ZPrimeGate& gate, std::uint64_t counts_d0,
                                                  std::uint64_t counts_d1) {
  if (!gate.passed())
    throw CalibrationError("Z' gate failed: extinction " + std::to_string(gate.extinction_db()) + " dB < 30 dB");
  const std::uint64_t total = counts_d0 + counts_d1;
  if (total == 0) throw CalibrationError("no X' calibration counts");
  OverlapCalibration cal;
  cal.max_overlap_sq =
      std::clamp(static_cast<double>(std::max(counts_d0, counts_d1)) / static_cast<double>(total), 0.5, 1.0);
  cal.overlap_c = std::clamp(std::sqrt(cal.max_overlap_sq), kMinOverlap, 1.0);
  cal.coefficient = std::clamp(-std::log2(cal.max_overlap_sq), 0.0, 1.0);
  return cal;
}

double overlap_from_coefficient(double coefficient) {
  if (!(coefficient >= 0.0 && coefficient <= 1.0)) throw DomainError("coefficient must lie in [0, 1]");
  return std::exp2(-0.5 * coefficient);
}

}  // namespace siqrng::protocol

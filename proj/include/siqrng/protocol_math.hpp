#pragma once

// Closed-form quantities of source-independent randomness certification:
// binary entropy, the finite-size phase-error sampling bound, the three
// randomness lengths and failure-probability composition. All functions are
// pure; probabilities that can underflow are carried as log2 values.

#include <cstdint>

namespace siqrng::protocol {

/// Observed finite-size counts feeding parameter estimation.
struct TallySummary {
  std::uint64_t n_total = 0;  ///< pulses
  std::uint64_t n_x_pulses = 0;
  std::uint64_t n_z_pulses = 0;
  std::uint64_t n_x = 0;  ///< detected X events, doubles included
  std::uint64_t n_z = 0;  ///< detected Z singles (doubles discarded)
  std::uint64_t x_wrong_singles = 0;
  std::uint64_t x_doubles = 0;
  std::uint64_t z_doubles_discarded = 0;

  /// (wrong singles + doubles / 2) / n_x; throws EmptyTallyError when n_x == 0.
  double error_rate_x() const;
  /// X share of detected events, n_x / (n_x + n_z).
  double detected_ratio_x() const;
};

struct SecurityParams {
  double theta = 0.001;
  double t_e = 100.0;
  double log2_epsilon_theta = 0.0;
  double log2_epsilon_total = 0.0;
};

struct RateBreakdown {
  double r0 = 0.0;
  double r1 = 0.0;
  double r_final = 0.0;
  double rescale_factor = 1.0;
  double entropy_cost = 0.0;  ///< n_Z * H(e_bX + theta)
  double coefficient = 1.0;   ///< -2 log2(overlap_c)
};

/// Phase-error sampling bound in both raw and clamped form.
struct SamplingBound {
  double log2_raw = 0.0;  ///< log2 of prefactor * 2^(-n xi)
  double xi = 0.0;

  double log2_clamped() const noexcept { return log2_raw < 0.0 ? log2_raw : 0.0; }
  double raw() const noexcept;
  double clamped() const noexcept;
};

/// H(x) = -x log2 x - (1-x) log2 (1-x), with H(0) = H(1) = 0.
double binary_entropy(double x);

/// xi(theta) = H(e + theta - q theta) - q H(e) - (1 - q) H(e + theta).
double xi_theta(double e_bx, double theta, double q_x);

/// Upper bound on Prob(e_pZ > e_bX + theta) for n detected events of which a
/// fraction q_x were measured in X. Requires 0 < q_x < 1, 0 < e_bx < 1.
SamplingBound epsilon_theta_bound(double n, double q_x, double e_bx, double theta);

/// Half-count floor max(e_bx, 1 / (2 n_x)); keeps the bound's prefactor finite
/// when no X errors were observed.
double regularized_error_rate(double e_bx, double n_x);

inline constexpr double kThetaGridStep = 1e-6;

/// Smallest theta on the 1e-6 grid whose bound is <= 2^log2_target.
/// Throws UnreachableTarget when the largest admissible theta still fails.
double solve_theta_log2(double n, double q_x, double e_bx, double log2_target);
double solve_theta(double n, double q_x, double e_bx, double target_epsilon);

/// R0 = n_Z (1 - H(e + theta)) - t_e. Non-positive means abort.
double randomness_length_ideal(double n_z, double e_bx, double theta, double t_e);

/// -2 log2(overlap_c); requires overlap_c in [1/sqrt2, 1].
double randomness_coefficient(double overlap_c);

/// R1 = -2 n_Z log2(c) - n_Z H(e + theta) - t_e.
double randomness_length_imperfect(double n_z, double e_bx, double theta, double t_e, double overlap_c);

/// 2 min(eta0, eta1) / (eta0 + eta1); both efficiencies in (0, 1].
double efficiency_rescale(double eta0, double eta1);

/// R_final = rescale * R1.
double randomness_length_final(double n_z, double e_bx, double theta, double t_e, double overlap_c, double eta0,
                               double eta1);

/// All three lengths together with their terms.
RateBreakdown rate_breakdown(double n_z, double e_bx, double theta, double t_e, double overlap_c, double eta0,
                             double eta1);

/// eps = sqrt((eps_theta + 2^-t_e) (2 - eps_theta - 2^-t_e)). t_e may be +inf.
double failure_probability(double epsilon_theta, double t_e);
/// Same, taking and returning log2 values; exact far below double underflow.
double failure_probability_log2(double log2_epsilon_theta, double t_e);

/// Z' gate: counts of the two detectors while a Z' eigenstate is sent.
struct ZPrimeGate {
  std::uint64_t counts_d0 = 0;
  std::uint64_t counts_d1 = 0;

  /// Extinction ratio in dB; +inf when the weaker detector saw nothing.
  double extinction_db() const;
  bool passed(double threshold_db = 30.0) const { return extinction_db() >= threshold_db; }
};

struct OverlapCalibration {
  double max_overlap_sq = 0.5;  ///< plug-in estimate of max |<x'|z'>|^2
  double overlap_c = 0.70710678118654752;
  double coefficient = 1.0;
};

/// Plug-in overlap estimate from X'-setting counts, clamped into [1/sqrt2, 1].
/// Throws CalibrationError when the Z' gate fails (below 30 dB) or no X'
/// counts were recorded.
OverlapCalibration overlap_bound_from_calibration(const ZPrimeGate& gate, std::uint64_t counts_d0,
                                                  std::uint64_t counts_d1);

/// overlap_c reproducing a given coefficient: c = 2^(-coefficient / 2).
double overlap_from_coefficient(double coefficient);

}  // namespace siqrng::protocol

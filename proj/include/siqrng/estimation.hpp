#pragma once

#include <optional>

#include "siqrng/protocol_math.hpp"

namespace siqrng::protocol {

struct EstimateOptions {
  double theta = 0.001;
  /// When set, theta is solved so that epsilon_theta <= 2^log2_target.
  std::optional<double> log2_epsilon_theta_target;
  double t_e = 100.0;
  double overlap_c = 0.0;  ///< 0 selects overlap_from_coefficient(coefficient)
  double coefficient = 0.952;
  double eta0 = 0.1;
  double eta1 = 0.1;
  double duration_s = 0.0;  ///< run time for the bits/second figure; 0 disables
  /// Basis-choice X probability, only used for the q_X mismatch flag.
  std::optional<double> prob_x;
};

struct Estimate {
  RateBreakdown rates;
  SecurityParams security;
  double e_bx_observed = 0.0;
  double e_bx_bound = 0.0;  ///< half-count-floored value fed to the sampling bound
  double q_x = 0.0;
  double n_detected = 0.0;
  double overlap_c = 0.0;
  double rate_bps = 0.0;
  /// q_X and the basis-choice probability differ by more than 10 % (relative).
  /// Z doubles leave n but stay in n_X, so this fires whenever they are common.
  bool basis_ratio_mismatch = false;

  bool aborted() const noexcept { return rates.r_final < 1.0; }
};

/// Finite-size estimate of certified randomness for a tally. Does not throw
/// on abort: callers inspect aborted().
Estimate estimate(const TallySummary& tally, const EstimateOptions& options);

}  // namespace siqrng::protocol

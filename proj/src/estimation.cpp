#include "siqrng/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "siqrng/errors.hpp"

namespace siqrng::protocol {

Estimate estimate(const TallySummary& tally, const EstimateOptions& options) {
  Estimate est;
  est.e_bx_observed = tally.error_rate_x();
  est.q_x = tally.detected_ratio_x();
  est.n_detected = static_cast<double>(tally.n_x + tally.n_z);
  est.e_bx_bound = regularized_error_rate(est.e_bx_observed, static_cast<double>(tally.n_x));
  est.overlap_c = options.overlap_c > 0.0 ? options.overlap_c : overlap_from_coefficient(options.coefficient);

  if (options.prob_x && *options.prob_x > 0.0) {
    const double choice_ratio = *options.prob_x;
    est.basis_ratio_mismatch = std::abs(est.q_x - choice_ratio) > 0.1 * choice_ratio;
  }

  SecurityParams& sec = est.security;
  sec.t_e = options.t_e;
  const bool bound_defined = est.q_x > 0.0 && est.q_x < 1.0 && est.e_bx_bound < 1.0;
  if (options.log2_epsilon_theta_target) {
    if (!bound_defined) throw UnreachableTarget("sampling bound undefined for this tally");
    sec.theta = solve_theta_log2(est.n_detected, est.q_x, est.e_bx_bound, *options.log2_epsilon_theta_target);
  } else {
    sec.theta = options.theta;
  }
  sec.log2_epsilon_theta =
      bound_defined && est.e_bx_bound + sec.theta <= 1.0
          ? epsilon_theta_bound(est.n_detected, est.q_x, est.e_bx_bound, sec.theta).log2_clamped()
          : 0.0;
  sec.log2_epsilon_total = failure_probability_log2(sec.log2_epsilon_theta, sec.t_e);

  // H is not monotone past 1/2; cap the argument there so a worse error rate
  // never certifies more.
  const double e_for_entropy = std::min(est.e_bx_observed, std::max(0.0, 0.5 - sec.theta));
  est.rates = rate_breakdown(static_cast<double>(tally.n_z), e_for_entropy, std::min(sec.theta, 0.5), sec.t_e,
                             est.overlap_c, options.eta0, options.eta1);
  if (options.duration_s > 0.0) est.rate_bps = std::max(0.0, est.rates.r_final) / options.duration_s;
  return est;
}

}  // namespace siqrng::protocol

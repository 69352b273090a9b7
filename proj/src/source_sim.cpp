#include "siqrng/source_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "siqrng/errors.hpp"
#include "siqrng/rng.hpp"

namespace siqrng::source {
namespace {
constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
}  // namespace

void SourceParams::validate() const {
  if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) throw DomainError("source lambda must be >= 0");
  if (!(pulse_rate > 0.0)) throw DomainError("source pulse rate must be > 0");
  if (!(fluctuation_rel_std >= 0.0)) throw DomainError("source fluctuation must be >= 0");
  if (!std::isfinite(hwp_angle_deg) || !std::isfinite(qwp_angle_deg))
    throw DomainError("waveplate angles must be finite");
}

PolarizationState PolarizationState::plus() {
  const double a = std::numbers::sqrt2 / 2.0;
  return {complex{a}, complex{a}};
}

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) noexcept {
  JonesMatrix r;
  r.m[0] = a.m[0] * b.m[0] + a.m[1] * b.m[2];
  r.m[1] = a.m[0] * b.m[1] + a.m[1] * b.m[3];
  r.m[2] = a.m[2] * b.m[0] + a.m[3] * b.m[2];
  r.m[3] = a.m[2] * b.m[1] + a.m[3] * b.m[3];
  return r;
}

// R(angle) diag(e^{-i d/2}, e^{i d/2}) R(-angle)
JonesMatrix retarder(double angle_rad, double retardance_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  const complex fast = std::polar(1.0, -retardance_rad / 2.0);
  const complex slow = std::polar(1.0, retardance_rad / 2.0);
  JonesMatrix j;
  j.m[0] = fast * c * c + slow * s * s;
  j.m[1] = (fast - slow) * c * s;
  j.m[2] = (fast - slow) * c * s;
  j.m[3] = fast * s * s + slow * c * c;
  return j;
}

JonesMatrix half_wave_plate(double angle_deg) { return retarder(deg_to_rad(angle_deg), std::numbers::pi); }
JonesMatrix quarter_wave_plate(double angle_deg) { return retarder(deg_to_rad(angle_deg), std::numbers::pi / 2.0); }

PolarizationState polarization_from_waveplates(double hwp_angle_deg, double qwp_angle_deg) {
  PolarizationState s = (half_wave_plate(hwp_angle_deg) * quarter_wave_plate(qwp_angle_deg))
                            .apply(PolarizationState::horizontal());
  const double norm = std::sqrt(s.norm_sq());
  s.h /= norm;
  s.v /= norm;
  return s;
}

PulseSource::PulseSource(const SourceParams& params)
    : params_(params), state_(polarization_from_waveplates(params.hwp_angle_deg, params.qwp_angle_deg)) {
  params_.validate();
  if (params_.fluctuation_rel_std != 0.0 || params_.mean_photons <= 0.0) return;
  const double lambda = params_.mean_photons;
  const double log_lambda = std::log(lambda);
  long double acc = 0.0L;
  for (std::uint32_t k = 0; k < kMaxPhotons; ++k) {
    const double pmf = std::exp(-lambda + k * log_lambda - std::lgamma(k + 1.0));
    acc += pmf;
    cdf_.push_back(static_cast<double>(acc));
    if (k > lambda && (pmf < 1e-300 || cdf_.back() >= 1.0)) break;
  }
}

std::uint32_t PulseSource::photon_count(std::uint64_t seed, std::uint64_t index) const {
  CounterRng rng(seed, index, Stream::source);
  if (params_.fluctuation_rel_std == 0.0) {
    if (params_.mean_photons <= 0.0) return 0;
    // Inversion against the tabulated CDF.
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), kMaxPhotons));
  }
  // A fresh distribution per pulse: libstdc++'s Poisson keeps a cached normal
  // variate between calls, which would couple neighbouring pulses.
  std::normal_distribution<double> fluctuation(0.0, params_.fluctuation_rel_std);
  const double lambda = std::max(0.0, params_.mean_photons * (1.0 + fluctuation(rng)));
  if (lambda <= 0.0) return 0;
  std::poisson_distribution<std::uint32_t> photons(lambda);
  return std::min(photons(rng), kMaxPhotons);
}

PulseSample sample_pulse(const SourceParams& params, std::uint64_t seed, std::uint64_t index) {
  return PulseSource(params).sample(seed, index);
}

}  // namespace siqrng::source

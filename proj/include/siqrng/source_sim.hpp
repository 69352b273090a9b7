#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace siqrng::source {

using complex = std::complex<double>;

enum class SourceKind { laser, sunlight };

struct SourceParams {
  double mean_photons = 14.4;      ///< lambda, photons per pulse before detection
  double pulse_rate = 4.0e6;       ///< pulses per second
  double hwp_angle_deg = 22.5;
  double qwp_angle_deg = 0.0;
  double fluctuation_rel_std = 0.0;  ///< relative std of per-pulse intensity
  SourceKind kind = SourceKind::laser;

  static SourceParams laser() { return {}; }
  static SourceParams sunlight() {
    SourceParams p;
    p.mean_photons = 11.6;
    p.fluctuation_rel_std = 0.05;
    p.kind = SourceKind::sunlight;
    return p;
  }
  void validate() const;
};

/// Jones vector alpha|H> + beta|V>.
struct PolarizationState {
  complex h{1.0, 0.0};
  complex v{0.0, 0.0};

  double norm_sq() const noexcept { return std::norm(h) + std::norm(v); }
  bool is_normalized(double tol = 1e-12) const noexcept { return std::abs(norm_sq() - 1.0) <= tol; }

  static PolarizationState horizontal() { return {}; }
  static PolarizationState plus();  ///< (|H> + |V>) / sqrt2
};

/// Row-major 2x2 complex matrix acting on Jones vectors.
struct JonesMatrix {
  std::array<complex, 4> m{complex{1.0}, complex{}, complex{}, complex{1.0}};

  PolarizationState apply(const PolarizationState& s) const noexcept {
    return {m[0] * s.h + m[1] * s.v, m[2] * s.h + m[3] * s.v};
  }
  friend JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) noexcept;
};

/// Linear retarder with fast axis at `angle_rad` from H and the given retardance.
JonesMatrix retarder(double angle_rad, double retardance_rad);
JonesMatrix half_wave_plate(double angle_deg);
JonesMatrix quarter_wave_plate(double angle_deg);

/// |H> through the quarter-wave plate, then the half-wave plate.
PolarizationState polarization_from_waveplates(double hwp_angle_deg, double qwp_angle_deg);

/// Per-pulse photons are capped here.
inline constexpr std::uint32_t kMaxPhotons = 65535;

struct PulseSample {
  std::uint32_t photon_count = 0;
  PolarizationState state;
};

/**
 * Pulse generator for one parameter set. The waveplate state is fixed per
 * source, so it is computed once; photon numbers are drawn from a
 * counter-based stream keyed by (seed, pulse index).
 */
class PulseSource {
public:
  explicit PulseSource(const SourceParams& params);

  const SourceParams& params() const noexcept { return params_; }
  const PolarizationState& state() const noexcept { return state_; }

  /// Photon count of pulse `index`: Poisson(lambda_eff) with
  /// lambda_eff = max(0, lambda (1 + rel_std * N(0,1))).
  std::uint32_t photon_count(std::uint64_t seed, std::uint64_t index) const;
  PulseSample sample(std::uint64_t seed, std::uint64_t index) const { return {photon_count(seed, index), state_}; }

private:
  SourceParams params_;
  PolarizationState state_;
  std::vector<double> cdf_;  ///< Poisson CDF for inversion when fluctuation is 0
};

PulseSample sample_pulse(const SourceParams& params, std::uint64_t seed, std::uint64_t index);

}  // namespace siqrng::source

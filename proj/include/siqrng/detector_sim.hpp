#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "siqrng/bits.hpp"
#include "siqrng/protocol_math.hpp"
#include "siqrng/rng.hpp"
#include "siqrng/source_sim.hpp"

namespace siqrng::detector {

enum class Basis : std::uint8_t { Z = 0, X = 1 };

/// Values match the binary event encoding (bits 1-2).
enum class Outcome : std::uint8_t { none = 0, d0 = 1, d1 = 2, both = 3 };

struct PhasePair {
  double clockwise = 0.0;      ///< phi_c, applied to |H>
  double anticlockwise = 0.0;  ///< phi_a, applied to |V>
};

struct MeasurementConfig {
  double prob_x = 0.004;
  PhasePair phase_z{0.0, 0.0};
  PhasePair phase_x{-std::numbers::pi / 4.0, std::numbers::pi / 4.0};
  std::uint64_t basis_seed = 0;

  void validate() const;
};

struct DetectorParams {
  double eta0 = 0.1;
  double eta1 = 0.1;
  double dark_rate = 200.0;   ///< counts per second
  double dead_time = 50e-9;   ///< seconds
  double gate_width = 100e-9; ///< seconds

  /// Probability that one detector dark-fires inside a gate.
  double dark_click_probability() const;
  void validate() const;
};

struct PulseEvent {
  std::uint64_t index = 0;
  Basis basis = Basis::Z;
  Outcome outcome = Outcome::none;

  friend bool operator==(const PulseEvent&, const PulseEvent&) = default;
};

/// One byte per event, layout of the binary event file: bit0 basis,
/// bits1-2 outcome. Index is implicit (first_index + position).
constexpr std::uint8_t encode(Basis b, Outcome o) noexcept {
  return static_cast<std::uint8_t>(static_cast<std::uint8_t>(b) | (static_cast<std::uint8_t>(o) << 1));
}
constexpr Basis decode_basis(std::uint8_t code) noexcept { return static_cast<Basis>(code & 1u); }
constexpr Outcome decode_outcome(std::uint8_t code) noexcept { return static_cast<Outcome>((code >> 1) & 3u); }

/// Contiguous run of pulse events.
class EventStream {
public:
  EventStream() = default;
  explicit EventStream(std::vector<std::uint8_t> codes, std::uint64_t first_index = 0)
      : first_index_(first_index), codes_(std::move(codes)) {}

  std::size_t size() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }
  std::uint64_t first_index() const noexcept { return first_index_; }
  PulseEvent operator[](std::size_t i) const noexcept {
    return {first_index_ + i, decode_basis(codes_[i]), decode_outcome(codes_[i])};
  }
  void push_back(Basis b, Outcome o) { codes_.push_back(encode(b, o)); }

  std::span<const std::uint8_t> codes() const noexcept { return codes_; }

  friend bool operator==(const EventStream&, const EventStream&) = default;

private:
  std::uint64_t first_index_ = 0;
  std::vector<std::uint8_t> codes_;
};

/// Deterministic in (seed, index): uniform draw < prob_x selects X.
Basis choose_basis(std::uint64_t basis_seed, std::uint64_t index, double prob_x);

/// Probabilities of the two detector arms after U_C * U_F(phi_c, phi_a) and
/// the final polarizing splitter. Throws DomainError for non-normalized input.
std::pair<double, double> effective_projection_probs(const source::PolarizationState& state, Basis basis,
                                                     const MeasurementConfig& config);

/// U_C * U_F for one phase setting.
source::JonesMatrix measurement_unitary(const PhasePair& phases);

/// Last real click time per detector (non-paralyzable dead time).
struct DeadState {
  double last_click[2] = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
};

/// Which detectors would fire if both were live.
struct RawClicks {
  bool d0 = false;
  bool d1 = false;
};

/// Photons split binomially (p0, p1) between arms, each arm thinned by its
/// efficiency; a dark count can fire either detector independently.
RawClicks raw_clicks(std::uint32_t photon_count, double p0, double p1, const DetectorParams& det, CounterRng& rng);

/// raw_clicks with the per-photon-count probabilities precomputed for one
/// basis setting; draws exactly what raw_clicks draws for the same rng.
class ClickModel {
public:
  ClickModel(double p0, double p1, const DetectorParams& det);
  RawClicks sample(std::uint32_t photon_count, CounterRng& rng) const;

private:
  struct Row {
    double none = 1.0;
    double no_d0 = 1.0;
    double no_d1 = 1.0;
  };
  static constexpr std::uint32_t kTableSize = 512;

  Row row(std::uint32_t photon_count) const;

  double a0_;
  double a1_;
  double dark_;
  std::vector<Row> table_;
};

/// Masks raw clicks with the dead time, updates the state, returns the outcome.
Outcome apply_dead_time(RawClicks raw, double time_s, const DetectorParams& det, DeadState& dead);

/// raw_clicks followed by apply_dead_time.
Outcome detect(std::uint32_t photon_count, double p0, double p1, const DetectorParams& det, CounterRng& rng,
               DeadState& dead, double time_s);

struct SimulationOptions {
  /// Worker threads for raw-click generation; 0 uses hardware_concurrency.
  unsigned threads = 1;
  std::size_t chunk_pulses = std::size_t{1} << 20;
};

/// n_pulses events for pulse indices [0, n_pulses). Output depends only on
/// the parameters and seeds, never on the thread/chunk layout.
EventStream run_simulation(const source::SourceParams& source, const DetectorParams& det,
                           const MeasurementConfig& config, std::uint64_t n_pulses, std::uint64_t seed,
                           const SimulationOptions& options = {});

/// Associative counter for tally(); merge() lets chunks reduce independently.
struct TallyAccumulator {
  protocol::TallySummary summary;

  void add(Basis basis, Outcome outcome) noexcept;
  void add(std::span<const std::uint8_t> codes) noexcept;
  TallyAccumulator& merge(const TallyAccumulator& other) noexcept;
};

/// Counts under the double-click policy: X doubles are half errors and stay in
/// n_X, Z doubles and all nulls are discarded. Throws EmptyTallyError if n_X == 0.
protocol::TallySummary tally(const EventStream& events);

/// Raw Z-basis bits: D0 -> 0, D1 -> 1; doubles and nulls skipped.
BitVector raw_bits(const EventStream& events);

}  // namespace siqrng::detector

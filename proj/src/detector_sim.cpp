#include "siqrng/detector_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "siqrng/errors.hpp"

namespace siqrng::detector {

using source::complex;
using source::JonesMatrix;
using source::PolarizationState;

void MeasurementConfig::validate() const {
  if (!(prob_x >= 0.0 && prob_x <= 1.0)) throw DomainError("measurement prob_x must lie in [0, 1]");
}

double DetectorParams::dark_click_probability() const { return -std::expm1(-dark_rate * gate_width); }

void DetectorParams::validate() const {
  if (!(eta0 >= 0.0 && eta0 <= 1.0 && eta1 >= 0.0 && eta1 <= 1.0))
    throw DomainError("detector efficiencies must lie in [0, 1]");
  if (!(dark_rate >= 0.0)) throw DomainError("dark rate must be >= 0");
  if (!(dead_time >= 0.0)) throw DomainError("dead time must be >= 0");
  if (!(gate_width > 0.0)) throw DomainError("gate width must be > 0");
}

Basis choose_basis(std::uint64_t basis_seed, std::uint64_t index, double prob_x) {
  CounterRng rng(basis_seed, index, Stream::basis);
  return rng.uniform() < prob_x ? Basis::X : Basis::Z;
}

JonesMatrix measurement_unitary(const PhasePair& phases) {
  JonesMatrix phase_flip;  // U_F
  phase_flip.m = {std::polar(1.0, phases.clockwise), complex{}, complex{}, std::polar(1.0, phases.anticlockwise)};
  JonesMatrix controller;  // U_C
  controller.m = {complex{0.5, 0.5}, complex{0.5, -0.5}, complex{0.5, -0.5}, complex{0.5, 0.5}};
  return controller * phase_flip;
}

std::pair<double, double> effective_projection_probs(const PolarizationState& state, Basis basis,
                                                     const MeasurementConfig& config) {
  if (!state.is_normalized(1e-9)) throw DomainError("effective_projection_probs: state is not normalized");
  const PhasePair& phases = basis == Basis::X ? config.phase_x : config.phase_z;
  const PolarizationState out = measurement_unitary(phases).apply(state);
  const double p0 = std::norm(out.h);
  const double p1 = std::norm(out.v);
  const double total = p0 + p1;
  return {p0 / total, p1 / total};
}

namespace {

double pow_count(double base, double k) { return base <= 0.0 ? 0.0 : std::exp(k * std::log(base)); }

// Splitting k photons binomially and thinning each arm independently leaves
// Binomial(k, p_i eta_i) survivors per arm, jointly multinomial. Only "any
// survivor" matters, so one uniform picks the joint outcome from
//   P(none) = (1 - a0 - a1)^k, P(no d0) = (1 - a0)^k, P(no d1) = (1 - a1)^k.
RawClicks draw_clicks(double none, double no_d0, double no_d1, double dark, bool any_photon, CounterRng& rng) {
  RawClicks raw;
  const double u = rng.uniform();
  if (any_photon && u >= none) {
    if (u < no_d0) raw.d1 = true;
    else if (u < no_d0 + no_d1 - none) raw.d0 = true;
    else raw.d0 = raw.d1 = true;
  }
  raw.d0 = (rng.uniform() < dark) || raw.d0;
  raw.d1 = (rng.uniform() < dark) || raw.d1;
  return raw;
}

}  // namespace

RawClicks raw_clicks(std::uint32_t photon_count, double p0, double p1, const DetectorParams& det, CounterRng& rng) {
  const double k = static_cast<double>(photon_count);
  const double a0 = std::clamp(p0 * det.eta0, 0.0, 1.0);
  const double a1 = std::clamp(p1 * det.eta1, 0.0, 1.0);
  return draw_clicks(pow_count(1.0 - a0 - a1, k), pow_count(1.0 - a0, k), pow_count(1.0 - a1, k),
                     det.dark_click_probability(), photon_count > 0, rng);
}

ClickModel::ClickModel(double p0, double p1, const DetectorParams& det)
    : a0_(std::clamp(p0 * det.eta0, 0.0, 1.0)),
      a1_(std::clamp(p1 * det.eta1, 0.0, 1.0)),
      dark_(det.dark_click_probability()) {
  table_.reserve(kTableSize);
  for (std::uint32_t k = 0; k < kTableSize; ++k) {
    const double kd = static_cast<double>(k);
    table_.push_back({pow_count(1.0 - a0_ - a1_, kd), pow_count(1.0 - a0_, kd), pow_count(1.0 - a1_, kd)});
  }
}

ClickModel::Row ClickModel::row(std::uint32_t photon_count) const {
  if (photon_count < kTableSize) return table_[photon_count];
  const double k = static_cast<double>(photon_count);
  return {pow_count(1.0 - a0_ - a1_, k), pow_count(1.0 - a0_, k), pow_count(1.0 - a1_, k)};
}

RawClicks ClickModel::sample(std::uint32_t photon_count, CounterRng& rng) const {
  const Row r = row(photon_count);
  return draw_clicks(r.none, r.no_d0, r.no_d1, dark_, photon_count > 0, rng);
}

Outcome apply_dead_time(RawClicks raw, double time_s, const DetectorParams& det, DeadState& dead) {
  bool fired[2] = {raw.d0, raw.d1};
  for (int i = 0; i < 2; ++i) {
    if (fired[i] && time_s - dead.last_click[i] < det.dead_time) fired[i] = false;
    if (fired[i]) dead.last_click[i] = time_s;
  }
  if (fired[0] && fired[1]) return Outcome::both;
  if (fired[0]) return Outcome::d0;
  if (fired[1]) return Outcome::d1;
  return Outcome::none;
}

Outcome detect(std::uint32_t photon_count, double p0, double p1, const DetectorParams& det, CounterRng& rng,
               DeadState& dead, double time_s) {
  return apply_dead_time(raw_clicks(photon_count, p0, p1, det, rng), time_s, det, dead);
}

EventStream run_simulation(const source::SourceParams& source_params, const DetectorParams& det,
                           const MeasurementConfig& config, std::uint64_t n_pulses, std::uint64_t seed,
                           const SimulationOptions& options) {
  det.validate();
  config.validate();
  const source::PulseSource pulses(source_params);
  const auto probs_z = effective_projection_probs(pulses.state(), Basis::Z, config);
  const auto probs_x = effective_projection_probs(pulses.state(), Basis::X, config);
  const ClickModel clicks_z(probs_z.first, probs_z.second, det);
  const ClickModel clicks_x(probs_x.first, probs_x.second, det);

  // Pass 1: raw clicks, a pure function of the pulse index. The outcome bits
  // temporarily hold the raw (d0, d1) pair.
  std::vector<std::uint8_t> codes(n_pulses);
  auto generate = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const Basis basis = choose_basis(config.basis_seed, i, config.prob_x);
      CounterRng rng(seed, i, Stream::detector);
      const RawClicks raw = (basis == Basis::X ? clicks_x : clicks_z).sample(pulses.photon_count(seed, i), rng);
      codes[i] = static_cast<std::uint8_t>(static_cast<unsigned>(basis) | (raw.d0 ? 2u : 0u) | (raw.d1 ? 4u : 0u));
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  const std::uint64_t chunk = std::max<std::uint64_t>(1, options.chunk_pulses);
  const std::uint64_t n_chunks = (n_pulses + chunk - 1) / chunk;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, n_chunks)));
  if (threads <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) generate(c * chunk, std::min(n_pulses, (c + 1) * chunk));
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::uint64_t c = t; c < n_chunks; c += threads) generate(c * chunk, std::min(n_pulses, (c + 1) * chunk));
      });
    }
  }

  // Pass 2: dead time couples consecutive pulses, so it is a serial scan.
  DeadState dead;
  const double period = 1.0 / source_params.pulse_rate;
  for (std::uint64_t i = 0; i < n_pulses; ++i) {
    const std::uint8_t c = codes[i];
    const RawClicks raw{(c & 2u) != 0, (c & 4u) != 0};
    const Outcome outcome =
        (raw.d0 || raw.d1) ? apply_dead_time(raw, static_cast<double>(i) * period, det, dead) : Outcome::none;
    codes[i] = encode(decode_basis(c), outcome);
  }
  return EventStream(std::move(codes));
}

void TallyAccumulator::add(Basis basis, Outcome outcome) noexcept {
  auto& s = summary;
  ++s.n_total;
  if (basis == Basis::X) {
    ++s.n_x_pulses;
    switch (outcome) {
      case Outcome::none: break;
      case Outcome::d0: ++s.n_x; break;
      case Outcome::d1: ++s.n_x; ++s.x_wrong_singles; break;
      case Outcome::both: ++s.n_x; ++s.x_doubles; break;
    }
  } else {
    ++s.n_z_pulses;
    switch (outcome) {
      case Outcome::none: break;
      case Outcome::d0:
      case Outcome::d1: ++s.n_z; break;
      case Outcome::both: ++s.z_doubles_discarded; break;
    }
  }
}

void TallyAccumulator::add(std::span<const std::uint8_t> codes) noexcept {
  for (const std::uint8_t c : codes) add(decode_basis(c), decode_outcome(c));
}

TallyAccumulator& TallyAccumulator::merge(const TallyAccumulator& other) noexcept {
  auto& a = summary;
  const auto& b = other.summary;
  a.n_total += b.n_total;
  a.n_x_pulses += b.n_x_pulses;
  a.n_z_pulses += b.n_z_pulses;
  a.n_x += b.n_x;
  a.n_z += b.n_z;
  a.x_wrong_singles += b.x_wrong_singles;
  a.x_doubles += b.x_doubles;
  a.z_doubles_discarded += b.z_doubles_discarded;
  return *this;
}

protocol::TallySummary tally(const EventStream& events) {
  TallyAccumulator acc;
  acc.add(events.codes());
  if (acc.summary.n_x == 0) throw EmptyTallyError("tally: no detected X-basis events");
  return acc.summary;
}

BitVector raw_bits(const EventStream& events) {
  BitVector bits;
  for (const std::uint8_t c : events.codes()) {
    if (decode_basis(c) != Basis::Z) continue;
    const Outcome o = decode_outcome(c);
    if (o == Outcome::d0) bits.push_back(false);
    else if (o == Outcome::d1) bits.push_back(true);
  }
  return bits;
}

}  // namespace siqrng::detector

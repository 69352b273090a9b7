#include <doctest.h>

#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "siqrng/detector_sim.hpp"
#include "siqrng/errors.hpp"

using namespace siqrng;
using namespace siqrng::detector;

namespace {

double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

double single_click_model(double lambda, double eta) {
  const double h = std::exp(-lambda * eta / 2.0);
  return 2.0 * h * (1.0 - h);
}

DetectorParams quiet_detector() {
  DetectorParams det;
  det.dark_rate = 0.0;
  det.dead_time = 0.0;
  return det;
}

}  // namespace

TEST_CASE("basis choice") {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    CHECK(choose_basis(1, i, 0.0) == Basis::Z);
    CHECK(choose_basis(1, i, 1.0) == Basis::X);
  }
  const std::uint64_t n = 10'000'000;
  std::uint64_t x = 0;
  for (std::uint64_t i = 0; i < n; ++i) x += choose_basis(7, i, 0.004) == Basis::X;
  const double frac = static_cast<double>(x) / n;
  CHECK(std::abs(frac - 0.004) < 3.0 * binomial_sigma(0.004, n));
  CHECK(choose_basis(7, 12345, 0.3) == choose_basis(7, 12345, 0.3));
}

TEST_CASE("projection probabilities at the operating point") {
  const MeasurementConfig config;
  const auto plus = source::PolarizationState::plus();
  const auto [x0, x1] = effective_projection_probs(plus, Basis::X, config);
  CHECK(x0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x1 == doctest::Approx(0.0).epsilon(1e-12));
  const auto [z0, z1] = effective_projection_probs(plus, Basis::Z, config);
  CHECK(z0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(z1 == doctest::Approx(0.5).epsilon(1e-12));

  source::PolarizationState bad;
  bad.h = 2.0;
  CHECK_THROWS_AS(effective_projection_probs(bad, Basis::Z, config), DomainError);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) {
    source::PolarizationState s{{g(rng), g(rng)}, {g(rng), g(rng)}};
    const double norm = std::sqrt(s.norm_sq());
    s.h /= norm;
    s.v /= norm;
    for (Basis b : {Basis::X, Basis::Z}) {
      const auto [p0, p1] = effective_projection_probs(s, b, config);
      CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("the two measurement settings are mutually unbiased") {
  // Each setting measures the observable A = U^dagger sigma_z U. Find its
  // eigenvectors from the closed form for a 2x2 Hermitian matrix and compare
  // across settings.
  using C = std::complex<double>;
  const MeasurementConfig config;
  auto eigvecs = [](const PhasePair& phases) {
    const auto u = measurement_unitary(phases).m;
    // A = U^dagger diag(1, -1) U
    const C a00 = std::conj(u[0]) * u[0] - std::conj(u[2]) * u[2];
    const C a01 = std::conj(u[0]) * u[1] - std::conj(u[2]) * u[3];
    const C a11 = std::conj(u[1]) * u[1] - std::conj(u[3]) * u[3];
    std::array<std::array<C, 2>, 2> vecs;
    for (int s = 0; s < 2; ++s) {
      const double lambda = s == 0 ? 1.0 : -1.0;
      // (A - lambda I) v = 0  ->  v = (a01, lambda - a00) unless degenerate
      C v0 = a01, v1 = lambda - a00;
      if (std::abs(v0) + std::abs(v1) < 1e-9) {
        v0 = lambda - a11;
        v1 = std::conj(a01);
      }
      const double n = std::sqrt(std::norm(v0) + std::norm(v1));
      vecs[s] = {v0 / n, v1 / n};
    }
    return vecs;
  };
  const auto ex = eigvecs(config.phase_x);
  const auto ez = eigvecs(config.phase_z);
  for (const auto& x : ex)
    for (const auto& z : ez) {
      const double overlap = std::norm(std::conj(x[0]) * z[0] + std::conj(x[1]) * z[1]);
      CHECK(std::abs(overlap - 0.5) < 1e-12);
    }
}

TEST_CASE("dead detectors and dark counts") {
  DetectorParams det = quiet_detector();
  det.eta0 = det.eta1 = 0.0;
  DeadState dead;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    CounterRng rng(1, i, Stream::detector);
    CHECK(detect(20, 0.5, 0.5, det, rng, dead, i * 2.5e-7) == Outcome::none);
  }

  det.dark_rate = 2.0e6;  // d = 0.2 per gate
  const double d = det.dark_rate * det.gate_width;
  const std::uint64_t n = 1'000'000;
  std::uint64_t any = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    CounterRng rng(2, i, Stream::detector);
    any += detect(0, 0.5, 0.5, det, rng, dead, i * 2.5e-7) != Outcome::none;
  }
  const double expected = 1.0 - std::exp(-2.0 * d);
  CHECK(std::abs(static_cast<double>(any) / n - expected) < 3.0 * binomial_sigma(expected, n));
}

TEST_CASE("single-click probability under a Poisson source") {
  const DetectorParams det = quiet_detector();
  const source::PulseSource src(source::SourceParams::laser());
  const ClickModel model(0.5, 0.5, det);
  const std::uint64_t n = 1'000'000;
  for (double eta : {0.05, 0.1, 0.3}) {
    DetectorParams d = det;
    d.eta0 = d.eta1 = eta;
    const ClickModel m(0.5, 0.5, d);
    std::uint64_t singles = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      CounterRng rng(9, i, Stream::detector);
      const auto raw = m.sample(src.photon_count(9, i), rng);
      singles += raw.d0 != raw.d1;
    }
    const double expected = single_click_model(14.4, eta);
    CHECK(std::abs(static_cast<double>(singles) / n - expected) < 3.0 * binomial_sigma(expected, n));
  }
}

TEST_CASE("click model agrees with the split-then-thin description") {
  // Literal model: binomial split, then each photon survives with eta.
  DetectorParams det;
  det.eta0 = 0.2;
  det.eta1 = 0.35;
  det.dark_rate = 1.0e6;
  const double p0 = 0.3, p1 = 0.7;
  const double dark = det.dark_click_probability();
  std::mt19937_64 ref_rng(99);
  std::uniform_real_distribution<double> u;
  for (std::uint32_t k : {0u, 1u, 3u, 14u, 600u}) {
    const int n = 400'000;
    std::array<double, 4> ref{}, got{};
    const ClickModel model(p0, p1, det);
    for (int t = 0; t < n; ++t) {
      std::binomial_distribution<std::uint32_t> split(k, p0);
      const std::uint32_t k0 = split(ref_rng);
      std::binomial_distribution<std::uint32_t> s0(k0, det.eta0), s1(k - k0, det.eta1);
      const bool d0 = s0(ref_rng) > 0 || u(ref_rng) < dark;
      const bool d1 = s1(ref_rng) > 0 || u(ref_rng) < dark;
      ref[d0 + 2 * d1] += 1;
      CounterRng rng(5, static_cast<std::uint64_t>(t) + 1000003ull * k, Stream::detector);
      const auto raw = model.sample(k, rng);
      got[raw.d0 + 2 * raw.d1] += 1;
    }
    // Two-sample chi-square over the four outcomes.
    double chi2 = 0.0;
    int dof = -1;
    for (int c = 0; c < 4; ++c) {
      if (ref[c] + got[c] == 0) continue;
      chi2 += (ref[c] - got[c]) * (ref[c] - got[c]) / (ref[c] + got[c]);
      ++dof;
    }
    if (dof > 0) CHECK(boost::math::gamma_q(dof / 2.0, chi2 / 2.0) > 0.001);
  }
}

TEST_CASE("click model matches raw_clicks draw for draw") {
  DetectorParams det;
  det.eta0 = 0.1;
  det.eta1 = 0.12;
  const ClickModel model(0.4, 0.6, det);
  for (std::uint32_t k = 0; k < 2000; k += 7) {
    for (std::uint64_t i = 0; i < 50; ++i) {
      CounterRng a(3, i * 4096 + k, Stream::detector), b(3, i * 4096 + k, Stream::detector);
      const auto ra = raw_clicks(k, 0.4, 0.6, det, a);
      const auto rb = model.sample(k, b);
      CHECK(ra.d0 == rb.d0);
      CHECK(ra.d1 == rb.d1);
    }
  }
}

TEST_CASE("dead time masks clicks per detector") {
  DetectorParams det = quiet_detector();
  det.dead_time = 1.0e-6;
  DeadState dead;
  CHECK(apply_dead_time({true, false}, 0.0, det, dead) == Outcome::d0);
  CHECK(apply_dead_time({true, true}, 0.5e-6, det, dead) == Outcome::d1);
  CHECK(apply_dead_time({true, true}, 1.0e-6, det, dead) == Outcome::d0);
  CHECK(apply_dead_time({true, true}, 2.1e-6, det, dead) == Outcome::both);
}

TEST_CASE("simulation at the laser operating point") {
  const source::SourceParams src;
  const DetectorParams det;
  const MeasurementConfig config;
  CHECK(run_simulation(src, det, config, 0, 1).empty());

  const std::uint64_t n = 10'000'000;
  const auto events = run_simulation(src, det, config, n, 2024);
  REQUIRE(events.size() == n);
  const auto t = tally(events);
  const double expected = single_click_model(14.4, 0.1);
  const double frac = static_cast<double>(t.n_z) / static_cast<double>(t.n_z_pulses);
  CHECK(std::abs(frac - expected) < 3.0 * binomial_sigma(expected, static_cast<double>(t.n_z_pulses)));
  CHECK(t.n_x_pulses + t.n_z_pulses == n);
  CHECK(t.error_rate_x() < 0.001);
}

TEST_CASE("X error rate equals the dark-count floor without misalignment") {
  DetectorParams det;
  det.dark_rate = 2.0e5;  // d = 0.02 per gate, large enough to measure
  det.dead_time = 0.0;
  MeasurementConfig config;
  config.prob_x = 0.5;
  const source::SourceParams src;
  const auto t = tally(run_simulation(src, det, config, 1'000'000, 31));

  // |+> in X: every photon goes to D0.
  const double d = det.dark_click_probability();
  const double p_d0 = 1.0 - std::exp(-src.mean_photons * det.eta0) * (1.0 - d);
  const double wrong = (1.0 - p_d0) * d;
  const double both = p_d0 * d;
  const double any = 1.0 - (1.0 - p_d0) * (1.0 - d);
  const double e = (wrong + 0.5 * both) / any;
  const double w2 = (wrong + 0.25 * both) / any;
  const double sigma = std::sqrt((w2 - e * e) / static_cast<double>(t.n_x));
  CHECK(std::abs(t.error_rate_x() - e) < 3.0 * sigma);
}

TEST_CASE("tally policy") {
  EventStream s;
  for (int i = 0; i < 97; ++i) s.push_back(Basis::X, Outcome::d0);
  s.push_back(Basis::X, Outcome::d1);
  s.push_back(Basis::X, Outcome::both);
  s.push_back(Basis::X, Outcome::both);
  s.push_back(Basis::X, Outcome::none);
  s.push_back(Basis::Z, Outcome::both);
  s.push_back(Basis::Z, Outcome::d1);
  s.push_back(Basis::Z, Outcome::none);
  const auto t = tally(s);
  CHECK(t.n_x == 100);
  CHECK(t.error_rate_x() == doctest::Approx(0.02));
  CHECK(t.n_z == 1);
  CHECK(t.z_doubles_discarded == 1);
  CHECK(t.n_x_pulses == 101);
  CHECK(t.n_z_pulses == 3);

  EventStream empty;
  for (int i = 0; i < 10; ++i) empty.push_back(i % 2 ? Basis::X : Basis::Z, Outcome::none);
  CHECK_THROWS_AS(tally(empty), EmptyTallyError);

  const auto bits = raw_bits(s);
  REQUIRE(bits.size() == 1);
  CHECK(bits.get(0));
}

TEST_CASE("tally equals an independent counter on random streams") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    EventStream s;
    std::uint64_t x = 0, xw = 0, xd = 0, z = 0, zd = 0, nx = 0;
    for (int i = 0; i < 5000; ++i) {
      const auto b = static_cast<Basis>(rng() & 1u);
      const auto o = static_cast<Outcome>(rng() & 3u);
      s.push_back(b, o);
      if (b == Basis::X) {
        ++nx;
        if (o != Outcome::none) ++x;
        if (o == Outcome::d1) ++xw;
        if (o == Outcome::both) ++xd;
      } else {
        if (o == Outcome::d0 || o == Outcome::d1) ++z;
        if (o == Outcome::both) ++zd;
      }
    }
    const auto t = tally(s);
    CHECK(t.n_x == x);
    CHECK(t.x_wrong_singles == xw);
    CHECK(t.x_doubles == xd);
    CHECK(t.n_z == z);
    CHECK(t.z_doubles_discarded == zd);
    CHECK(t.n_x_pulses == nx);

    // Associative reduction in two halves.
    TallyAccumulator a, b;
    a.add(s.codes().subspan(0, 1234));
    b.add(s.codes().subspan(1234));
    a.merge(b);
    CHECK(a.summary.n_x == t.n_x);
    CHECK(a.summary.n_z == t.n_z);
    CHECK(a.summary.x_doubles == t.x_doubles);
  }
}

TEST_CASE("chunked and threaded simulation is byte-identical to serial") {
  source::SourceParams src;
  src.mean_photons = 2.0;
  DetectorParams det;
  det.dead_time = 1.3e-6;  // spans several pulse periods
  det.dark_rate = 1e5;
  MeasurementConfig config;
  config.prob_x = 0.3;
  const std::uint64_t n = 300'000;
  SimulationOptions serial;
  serial.chunk_pulses = n;
  SimulationOptions chunked;
  chunked.threads = 4;
  chunked.chunk_pulses = 777;
  const auto a = run_simulation(src, det, config, n, 5, serial);
  const auto b = run_simulation(src, det, config, n, 5, chunked);
  CHECK(a == b);
  const auto c = run_simulation(src, det, config, n, 6, serial);
  CHECK_FALSE(a == c);
}

TEST_CASE("detection is independent of the basis label") {
  MeasurementConfig config;
  config.prob_x = 0.5;
  const auto events = run_simulation(source::SourceParams{}, DetectorParams{}, config, 1'000'000, 12);
  double table[2][2] = {};
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto e = events[i];
    table[static_cast<int>(e.basis)][e.outcome != Outcome::none] += 1;
  }
  const double total = events.size();
  double chi2 = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int d = 0; d < 2; ++d) {
      const double expected = (table[b][0] + table[b][1]) * (table[0][d] + table[1][d]) / total;
      chi2 += (table[b][d] - expected) * (table[b][d] - expected) / expected;
    }
  CHECK(boost::math::gamma_q(0.5, chi2 / 2.0) > 0.01);
}

TEST_CASE("Z double-click rate grows with lambda") {
  const std::uint64_t n = 200'000;
  double previous = -1.0;
  for (double lambda : {2.0, 5.0, 10.0, 15.0, 25.0}) {
    source::SourceParams src;
    src.mean_photons = lambda;
    MeasurementConfig config;
    config.prob_x = 0.0;
    const auto t = tally([&] {
      auto e = run_simulation(src, DetectorParams{}, config, n, 3);
      EventStream with_x = e;
      with_x.push_back(Basis::X, Outcome::d0);  // keep n_X non-empty for tally()
      return with_x;
    }());
    const double rate = static_cast<double>(t.z_doubles_discarded) / n;
    if (previous >= 0.0) {
      const double sigma = std::hypot(binomial_sigma(rate, n), binomial_sigma(previous, n));
      CHECK(rate - previous > 3.0 * sigma);
    }
    previous = rate;
  }
}

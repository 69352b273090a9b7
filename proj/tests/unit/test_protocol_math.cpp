#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "../common/oracles.hpp"
#include "siqrng/errors.hpp"
#include "siqrng/estimation.hpp"
#include "siqrng/protocol_math.hpp"

using namespace siqrng;
using namespace siqrng::protocol;

namespace {
constexpr std::uint64_t kLaserNz = 1733623848ull + 1843484418ull;
constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
}  // namespace

TEST_CASE("binary entropy endpoints and symmetry") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.0043) == doctest::Approx(oracle::entropy50(0.0043)).epsilon(1e-13));
  CHECK(binary_entropy(0.0043) == doctest::Approx(0.0400).epsilon(0.01));
  for (double x : {0.01, 0.1, 0.3, 0.49}) CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1.0 - x)));
  CHECK_THROWS_AS(binary_entropy(-1e-9), DomainError);
  CHECK_THROWS_AS(binary_entropy(1.0 + 1e-9), DomainError);
}

TEST_CASE("binary entropy against a 50-digit reference on a 10^4 grid") {
  double worst = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    worst = std::max(worst, std::abs(binary_entropy(x) - oracle::entropy50(x)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("xi(theta)") {
  CHECK(xi_theta(0.0033, 0.0, 0.004) == 0.0);
  const double v = xi_theta(0.0033, 0.001, 0.004);
  CHECK(v > 0.0);
  CHECK(v == doctest::Approx(oracle::xi50(0.0033, 0.001, 0.004)).epsilon(1e-9));
  // Second implementation: written as a sum of three independent entropies.
  const double e = 0.25, t = 0.1, q = 0.5;
  const double alt = oracle::entropy50(e + t - q * t) - q * oracle::entropy50(e) - (1 - q) * oracle::entropy50(e + t);
  CHECK(xi_theta(e, t, q) == doctest::Approx(alt).epsilon(1e-12));
  CHECK_THROWS_AS(xi_theta(0.9, 0.2, 0.5), DomainError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double eb = 0.5 * u(rng);
    const double th = (1.0 - eb) * u(rng);
    CHECK(xi_theta(eb, th, u(rng)) >= 0.0);
  }
}

TEST_CASE("sampling bound values") {
  SUBCASE("theta = 0 gives the prefactor") {
    const double n = 1e6, q = 0.004, e = 0.0033;
    const auto b = epsilon_theta_bound(n, q, e, 0.0);
    CHECK(b.raw() == doctest::Approx(1.0 / std::sqrt(q * (1 - q) * e * (1 - e) * n)).epsilon(1e-13));
  }
  SUBCASE("detector-count scale stays representable in log2") {
    const auto b = epsilon_theta_bound(9e8, 0.004, 0.0033, 0.001);
    CHECK(b.log2_raw <= -100.0);
    CHECK(b.log2_raw == doctest::Approx(oracle::log2_bound50(9e8, 0.004, 0.0033, 0.001)).epsilon(1e-8));
    CHECK(std::isfinite(b.log2_raw));
  }
  SUBCASE("clamp reported alongside raw") {
    const auto b = epsilon_theta_bound(10, 0.5, 0.1, 0.0);
    CHECK(b.log2_raw > 0.0);
    CHECK(b.log2_clamped() == 0.0);
    CHECK(b.clamped() == 1.0);
  }
  SUBCASE("singular prefactor") {
    CHECK_THROWS_AS(epsilon_theta_bound(100, 0.5, 0.0, 0.1), DomainError);
    CHECK_THROWS_AS(epsilon_theta_bound(100, 0.0, 0.1, 0.1), DomainError);
    CHECK_THROWS_AS(epsilon_theta_bound(100, 1.0, 0.1, 0.1), DomainError);
  }
  CHECK(regularized_error_rate(0.0, 1000) == 0.0005);
  CHECK(regularized_error_rate(0.01, 1000) == 0.01);
}

TEST_CASE("sampling bound is non-increasing in theta and n") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double n = std::pow(10.0, 2.0 + 6.0 * u(rng));
    const double q = 0.01 + 0.98 * u(rng);
    const double e = 0.001 + 0.4 * u(rng);
    const double t1 = 0.2 * u(rng) + 1e-6;
    const double t2 = t1 + 0.05 * u(rng);
    CHECK(epsilon_theta_bound(n, q, e, t2).log2_raw <= epsilon_theta_bound(n, q, e, t1).log2_raw + 1e-12);
    CHECK(epsilon_theta_bound(2 * n, q, e, t1).log2_raw <= epsilon_theta_bound(n, q, e, t1).log2_raw + 1e-12);
  }
}

TEST_CASE("sampling bound holds against exhaustive equal splits") {
  // n = 24, 6 errors, theta = 0.125.
  {
    const auto hist = oracle::split_histogram(24, 0b111111u);
    const double empirical = oracle::split_exceed_probability(hist, 24, 6, 0.125);
    const double e_star = 6.0 / 24.0 - 0.5 * 0.125;
    CHECK(empirical <= epsilon_theta_bound(24, 0.5, e_star, 0.125).clamped());
  }
  std::mt19937 rng(3);
  int cases = 0;
  for (unsigned n = 8; n <= 20; n += 4) {
    for (unsigned k = 1; k < n; ++k) {
      // Scatter the k errors at random; the split distribution does not
      // depend on where they sit, so this also checks the enumeration.
      std::vector<unsigned> pos(n);
      for (unsigned i = 0; i < n; ++i) pos[i] = i;
      std::shuffle(pos.begin(), pos.end(), rng);
      std::uint32_t mask = 0;
      for (unsigned i = 0; i < k; ++i) mask |= 1u << pos[i];
      const auto hist = oracle::split_histogram(n, mask);
      for (double theta : {0.05, 0.1, 0.2, 0.3}) {
        const double e_star = static_cast<double>(k) / n - 0.5 * theta;
        if (e_star <= 0.0 || e_star + theta >= 1.0) continue;
        const double empirical = oracle::split_exceed_probability(hist, n, k, theta);
        CHECK(empirical <= epsilon_theta_bound(n, 0.5, e_star, theta).clamped());
        ++cases;
      }
    }
  }
  CHECK(cases >= 100);
}

TEST_CASE("solve_theta") {
  const double n = 3.6e9, q = 0.004, e = 0.0033;
  const double target = epsilon_theta_bound(n, q, e, 0.001).log2_raw;
  const double theta = solve_theta_log2(n, q, e, target);
  CHECK(theta <= 0.001 + 1e-12);
  CHECK(epsilon_theta_bound(n, q, e, theta).log2_raw <= target);
  CHECK(epsilon_theta_bound(n, q, e, theta - kThetaGridStep).log2_raw > target);

  CHECK(solve_theta(1e6, 0.5, 0.1, 1.0) == 0.0);
  CHECK_THROWS_AS(solve_theta_log2(10, 0.5, 0.3, -1e6), UnreachableTarget);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double nn = std::pow(10.0, 4.0 + 5.0 * u(rng));
    const double qq = 0.01 + 0.9 * u(rng);
    const double ee = 0.001 + 0.2 * u(rng);
    const double log2_target = -1.0 - 60.0 * u(rng);
    double th = 0.0;
    try {
      th = solve_theta_log2(nn, qq, ee, log2_target);
    } catch (const UnreachableTarget&) {
      continue;
    }
    CHECK(epsilon_theta_bound(nn, qq, ee, th).log2_raw <= log2_target);
  }
}

TEST_CASE("randomness lengths") {
  CHECK(randomness_length_ideal(1000, 0.0, 0.0, 100) == 900.0);
  CHECK(randomness_length_ideal(100, 0.5, 0.0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  const double nz = 3.577e9;
  const double r0 = randomness_length_ideal(nz, 0.0033, 0.001, 100);
  CHECK(r0 == doctest::Approx(nz * (1.0 - oracle::entropy50(0.0043)) - 100).epsilon(1e-12));
  CHECK(r0 == doctest::Approx(3.434e9).epsilon(1e-3));

  CHECK(randomness_length_imperfect(nz, 0.0033, 0.001, 100, kInvSqrt2) == doctest::Approx(r0).epsilon(1e-14));
  const double r1_same = randomness_length_imperfect(nz, 0.0033, 0.001, 100, 1.0);
  CHECK(r1_same == doctest::Approx(-nz * binary_entropy(0.0043) - 100));
  CHECK(r1_same <= 0.0);
  CHECK_THROWS_AS(randomness_coefficient(0.7), DomainError);
  CHECK_THROWS_AS(randomness_coefficient(1.01), DomainError);

  const double c = overlap_from_coefficient(0.952);
  const double r1 = randomness_length_imperfect(static_cast<double>(kLaserNz), 0.0033, 0.001, 100, c);
  CHECK(r1 == doctest::Approx(3.26e9).epsilon(0.005));

  CHECK(efficiency_rescale(0.1, 0.1) == 1.0);
  CHECK(efficiency_rescale(0.1, 0.2) == doctest::Approx(2.0 / 3.0));
  CHECK(randomness_length_final(nz, 0.0033, 0.001, 100, c, 0.1, 0.1) ==
        randomness_length_imperfect(nz, 0.0033, 0.001, 100, c));
  CHECK(std::abs(randomness_length_final(nz, 0.0033, 0.001, 100, c, 0.1, 1e-12)) < 1.0);
  CHECK_THROWS_AS(efficiency_rescale(0.0, 0.1), DomainError);
}

TEST_CASE("length ordering and monotonicity in e_bX") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double nz = 1e3 + 1e9 * u(rng);
    const double theta = 0.01 * u(rng);
    const double e1 = (0.5 - theta) * u(rng);
    const double e2 = e1 + (0.5 - theta - e1) * u(rng);
    const double c = kInvSqrt2 + (1.0 - kInvSqrt2) * u(rng);
    const double eta0 = 0.01 + 0.99 * u(rng), eta1 = 0.01 + 0.99 * u(rng);
    const auto r = rate_breakdown(nz, e1, theta, 100, c, eta0, eta1);
    CHECK(r.r1 <= r.r0 + 1e-6 * nz);
    if (r.r1 >= 0.0) CHECK(r.r_final <= r.r1);
    const auto r2 = rate_breakdown(nz, e2, theta, 100, c, eta0, eta1);
    CHECK(r2.r0 <= r.r0);
    CHECK(r2.r1 <= r.r1);
    CHECK(r2.r_final <= r.r_final);
  }
}

TEST_CASE("failure probability composition") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(failure_probability(0.0, inf) == 0.0);
  CHECK(failure_probability(1.0, inf) == 1.0);
  // log2 sqrt(2^-99 (2 - 2^-99)) = -49 + 0.5 log2(1 - 2^-100)
  const double expected = -49.0 + 0.5 * std::log1p(-std::exp2(-100.0)) / std::numbers::ln2;
  CHECK(failure_probability_log2(-100.0, 100.0) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(failure_probability_log2(-1e6, 100.0) == doctest::Approx(-49.5).epsilon(1e-12));
  for (double et : {0.0, 1e-6, 0.01, 0.3, 1.0})
    for (double te : {0.0, 1.0, 10.0, 100.0}) {
      const double eps = failure_probability(et, te);
      CHECK(eps >= 0.0);
      CHECK(eps <= 1.0);
      if (et > 0.0) CHECK(std::exp2(failure_probability_log2(std::log2(et), te)) == doctest::Approx(eps));
    }
}

TEST_CASE("overlap calibration") {
  const ZPrimeGate gate{1000000, 100};
  CHECK(gate.extinction_db() == doctest::Approx(40.0));
  CHECK(gate.passed());
  CHECK_FALSE(ZPrimeGate{1000, 10}.passed());

  auto even = overlap_bound_from_calibration(gate, 50, 50);
  CHECK(even.overlap_c == doctest::Approx(kInvSqrt2));
  CHECK(even.coefficient == doctest::Approx(1.0));

  auto same = overlap_bound_from_calibration(gate, 100, 0);
  CHECK(same.overlap_c == 1.0);
  CHECK(same.coefficient == 0.0);

  // p = 2^-0.952 realized by counts.
  const std::uint64_t total = 100000000;
  const auto hi = static_cast<std::uint64_t>(std::llround(std::exp2(-0.952) * total));
  auto measured = overlap_bound_from_calibration(gate, total - hi, hi);
  CHECK(measured.coefficient == doctest::Approx(0.952).epsilon(1e-6));
  CHECK(randomness_coefficient(measured.overlap_c) == doctest::Approx(0.952).epsilon(1e-6));
  CHECK(overlap_from_coefficient(0.952) == doctest::Approx(std::sqrt(std::exp2(-0.952))));

  CHECK_THROWS_AS(overlap_bound_from_calibration(ZPrimeGate{1000, 10}, 50, 50), CalibrationError);
  CHECK_THROWS_AS(overlap_bound_from_calibration(gate, 0, 0), CalibrationError);
}

TEST_CASE("tally summary") {
  TallySummary t;
  t.n_x = 100;
  t.x_wrong_singles = 1;
  t.x_doubles = 2;
  CHECK(t.error_rate_x() == doctest::Approx(0.02));
  CHECK_THROWS_AS(TallySummary{}.error_rate_x(), EmptyTallyError);
}

TEST_CASE("estimate at the laser operating point") {
  TallySummary t;
  t.n_x = 14'400'000;
  t.x_wrong_singles = 47'520;  // 0.33 %
  t.n_z = kLaserNz;
  t.n_x_pulses = 20'000'000;
  t.n_z_pulses = 7'180'000'000ull;
  t.n_total = t.n_x_pulses + t.n_z_pulses;
  EstimateOptions opt;
  opt.duration_s = 1800.0;
  const auto est = estimate(t, opt);
  CHECK(est.e_bx_observed == doctest::Approx(0.0033));
  CHECK(est.rates.r_final == doctest::Approx(3.26e9).epsilon(0.005));
  CHECK(est.rate_bps == doctest::Approx(1.81e6).epsilon(0.005));
  CHECK_FALSE(est.aborted());
  CHECK(est.security.log2_epsilon_theta < -100.0);

  t.x_wrong_singles = t.n_x * 45 / 100;
  const auto bad = estimate(t, opt);
  CHECK(bad.aborted());
}

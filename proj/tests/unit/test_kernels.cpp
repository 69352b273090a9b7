#include <doctest.h>

#include <bit>
#include <random>
#include <vector>

#include "siqrng/bits.hpp"
#include "siqrng/ntt.hpp"
#include "siqrng/simd/kernels.hpp"

using namespace siqrng;
using namespace siqrng::simd;

namespace {

std::vector<std::uint64_t> random_words(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint64_t> w(n);
  for (auto& x : w) x = rng();
  return w;
}

std::vector<std::uint32_t> random_residues(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint32_t> v(n);
  for (auto& x : v) x = static_cast<std::uint32_t>(rng() % kPrime);
  return v;
}

unsigned dot_oracle(const std::vector<std::uint64_t>& seed, std::size_t offset, const std::vector<std::uint64_t>& x,
                    std::size_t n_words) {
  unsigned parity = 0;
  for (std::size_t j = 0; j < n_words * 64; ++j) {
    const std::size_t s = offset + j;
    const unsigned a = (seed[s / 64] >> (s % 64)) & 1u;
    const unsigned b = (x[j / 64] >> (j % 64)) & 1u;
    parity ^= a & b;
  }
  return parity;
}

std::uint32_t mont_mul_oracle(std::uint32_t a, std::uint32_t b) {
  // a * b * 2^-32 mod p using the modular inverse of 2^32.
  const std::uint64_t r_inv = mod_pow(static_cast<std::uint32_t>((std::uint64_t{1} << 32) % kPrime), kPrime - 2);
  const std::uint64_t ab = static_cast<std::uint64_t>(a) * b % kPrime;
  return static_cast<std::uint32_t>(ab * r_inv % kPrime);
}

std::vector<const Kernels*> all_tables() {
  std::vector<const Kernels*> tables{&scalar_kernels()};
  if (avx2_kernels() != nullptr) tables.push_back(avx2_kernels());
  return tables;
}

}  // namespace

TEST_CASE("dispatch") {
  const Kernels& k = active();
  CHECK(k.name != nullptr);
  if (avx2_kernels() == nullptr) MESSAGE("AVX2 kernels unavailable; only the scalar table is exercised");
}

TEST_CASE("Montgomery arithmetic") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const auto a = static_cast<std::uint32_t>(rng() % kPrime);
    const auto b = static_cast<std::uint32_t>(rng() % kPrime);
    CHECK(mont_mul(a, b) == mont_mul_oracle(a, b));
    CHECK(from_mont(to_mont(a)) == a);
    CHECK(mod_add(a, b) == (static_cast<std::uint64_t>(a) + b) % kPrime);
    CHECK(mod_sub(a, b) == (static_cast<std::uint64_t>(a) + kPrime - b) % kPrime);
  }
  CHECK(mod_pow(kPrimitiveRoot, (kPrime - 1) / 2) == kPrime - 1);
  CHECK(mod_pow(kPrimitiveRoot, (kPrime - 1) / 3) != 1);
  CHECK(mod_pow(kPrimitiveRoot, (kPrime - 1) / 5) != 1);
}

TEST_CASE("GF(2) shifted dot product matches a bitwise oracle") {
  std::mt19937_64 rng(2);
  for (const Kernels* k : all_tables()) {
    for (std::size_t n_words : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 33u}) {
      auto x = random_words(rng, n_words);
      auto seed = random_words(rng, n_words + 8);
      for (std::size_t offset : {0u, 1u, 63u, 64u, 65u, 130u, 200u}) {
        CHECK(k->gf2_dot_shifted(seed.data(), offset, x.data(), n_words) == dot_oracle(seed, offset, x, n_words));
      }
    }
  }
}

TEST_CASE("popcount") {
  std::mt19937_64 rng(3);
  for (const Kernels* k : all_tables()) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 15u, 16u, 17u, 100u, 1001u}) {
      const auto w = random_words(rng, n);
      std::size_t expected = 0;
      for (const auto x : w) expected += static_cast<std::size_t>(std::popcount(x));
      CHECK(k->popcount(w.data(), n) == expected);
    }
  }
}

TEST_CASE("AVX2 table is bit-identical to scalar") {
  const Kernels* avx = avx2_kernels();
  if (avx == nullptr) return;
  const Kernels& sc = scalar_kernels();
  std::mt19937_64 rng(4);
  for (std::size_t n : {1u, 7u, 8u, 9u, 16u, 31u, 64u, 1000u}) {
    const auto b = random_residues(rng, n);
    const auto tw = random_residues(rng, n);
    auto a1 = random_residues(rng, n);
    auto a2 = a1;
    sc.mont_mul_pointwise(a1.data(), b.data(), n);
    avx->mont_mul_pointwise(a2.data(), b.data(), n);
    CHECK(a1 == a2);

    auto lo1 = random_residues(rng, n), hi1 = random_residues(rng, n);
    auto lo2 = lo1, hi2 = hi1;
    sc.dif_butterflies(lo1.data(), hi1.data(), tw.data(), n);
    avx->dif_butterflies(lo2.data(), hi2.data(), tw.data(), n);
    CHECK(lo1 == lo2);
    CHECK(hi1 == hi2);

    sc.dit_butterflies(lo1.data(), hi1.data(), tw.data(), n);
    avx->dit_butterflies(lo2.data(), hi2.data(), tw.data(), n);
    CHECK(lo1 == lo2);
    CHECK(hi1 == hi2);
  }
  // Edge residues: 0, 1, p - 1.
  std::vector<std::uint32_t> edge{0, 1, kPrime - 1, kPrime - 2, 0, kPrime - 1, 1, kPrime - 1};
  auto e1 = edge, e2 = edge;
  sc.mont_mul_pointwise(e1.data(), edge.data(), edge.size());
  avx->mont_mul_pointwise(e2.data(), edge.data(), edge.size());
  CHECK(e1 == e2);
  auto l1 = edge, h1 = std::vector<std::uint32_t>(edge.rbegin(), edge.rend());
  auto l2 = l1, h2 = h1;
  sc.dif_butterflies(l1.data(), h1.data(), edge.data(), edge.size());
  avx->dif_butterflies(l2.data(), h2.data(), edge.data(), edge.size());
  CHECK(l1 == l2);
  CHECK(h1 == h2);
}

TEST_CASE("NTT round trip and convolution") {
  std::mt19937_64 rng(5);
  for (const Kernels* k : all_tables()) {
    for (unsigned lg : {1u, 2u, 3u, 4u, 5u, 8u, 11u}) {
      const NttPlan plan(lg, *k);
      const std::size_t n = plan.size();
      auto a = random_residues(rng, n);
      auto t = a;
      for (auto& x : t) x = to_mont(x);
      plan.forward(t);
      plan.inverse(t);
      const std::uint32_t n_mod = static_cast<std::uint32_t>(n % kPrime);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(from_mont(t[i]) == static_cast<std::uint64_t>(a[i]) * n_mod % kPrime);

      // Cyclic bit convolution against the O(n^2) definition.
      BitVector x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x.set(i, rng() & 1u);
        y.set(i, rng() & 1u);
      }
      const auto got = plan.convolve_bits(x, y, 0, n);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t want = 0;
        for (std::size_t j = 0; j < n; ++j) want += x.get(j) & y.get((i + n - j) % n);
        CHECK(got[i] == want);
      }
    }
  }
}

TEST_CASE("bit vector packing") {
  std::mt19937_64 rng(6);
  for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 63u, 64u, 65u, 1000u}) {
    std::vector<std::uint8_t> bools(n);
    for (auto& b : bools) b = rng() & 1u;
    const auto v = BitVector::from_bools(bools);
    REQUIRE(v.size() == n);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(v.get(i) == (bools[i] != 0));
      ones += bools[i];
    }
    CHECK(v.popcount() == ones);
    const auto bytes = v.to_bytes_msb();
    CHECK(bytes.size() == (n + 7) / 8);
    for (std::size_t i = 0; i < n; ++i) CHECK(((bytes[i / 8] >> (7 - i % 8)) & 1u) == bools[i]);
    if (n % 8 != 0) CHECK((bytes.back() & ((1u << (8 - n % 8)) - 1u)) == 0u);
    CHECK(BitVector::from_bytes_msb(bytes, n) == v);
    if (n > 10) CHECK(v.slice(3, 7) == BitVector::from_bools(std::span(bools).subspan(3, 7)));
  }
}

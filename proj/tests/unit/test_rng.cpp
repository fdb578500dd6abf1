#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "tbal/rng.hpp"

using tbal::Rng;
using tbal::RngSeed;

TEST_CASE("same seed gives the same stream") {
  Rng a(RngSeed{42}), b(RngSeed{42});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams are distinct and reproducible") {
  const Rng root(RngSeed{7});
  auto x = root.derive("train", 1), y = root.derive("train", 2), z = root.derive("query", 1);
  auto x2 = root.derive("train", 1);
  const auto vx = x.next_u64();
  CHECK(vx == x2.next_u64());
  CHECK(vx != y.next_u64());
  CHECK(vx != z.next_u64());
}

TEST_CASE("uniform lies in [0, 1) with mean near 1/2") {
  Rng r(RngSeed{1});
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal has unit variance") {
  Rng r(RngSeed{2});
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s += v;
    s2 += v * v;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("below stays in range") {
  Rng r(RngSeed{3});
  for (int i = 0; i < 10000; ++i) CHECK(r.below(7) < 7);
}

TEST_CASE("sample_indices draws distinct indices and is prefix stable") {
  auto a = Rng(RngSeed{5}).sample_indices(100, 30);
  auto b = Rng(RngSeed{5}).sample_indices(100, 60);
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 30);
  CHECK(std::equal(a.begin(), a.end(), b.begin()));
  for (auto i : b) CHECK(i < 100);
}

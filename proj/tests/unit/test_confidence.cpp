#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../oracles.hpp"
#include "tbal/confidence.hpp"

using namespace tbal;
using confidence::Kind;

namespace {
model::LinearModel with_bias(std::vector<double> bias) {
  auto m = model::LinearModel::zeros(static_cast<int>(bias.size()), 1);
  m.bias = std::move(bias);
  return m;
}
const std::vector<double> kOrigin{0.0};
confidence::Config conf(Kind kind, double temperature = 1.0) {
  confidence::Config c;
  c.kind = kind;
  c.temperature = temperature;
  return c;
}
}  // namespace

TEST_CASE("abs margin of a unit-norm binary model") {
  auto m = model::LinearModel::zeros(2, 2, true);
  m.weights = {1.0, 0.0};
  const auto s = confidence::score(conf(Kind::AbsMargin), m, std::vector<double>{0.3, 0.4});
  CHECK(s.label == 1);
  CHECK(s.confidence == doctest::Approx(0.3));
  const auto n = confidence::score(conf(Kind::AbsMargin), m, std::vector<double>{-0.3, 0.4});
  CHECK(n.label == 0);
  CHECK(n.confidence == doctest::Approx(0.3));
}

TEST_CASE("abs margin for multiclass is the top-two gap") {
  const auto s = confidence::score(conf(Kind::AbsMargin), with_bias({0.1, 2.0, -1.0}), kOrigin);
  CHECK(s.label == 1);
  CHECK(s.confidence == doctest::Approx(1.9));
}

TEST_CASE("softmax of equal logits over 10 classes is 0.1") {
  const auto s = confidence::score(conf(Kind::Softmax), with_bias(std::vector<double>(10, 0.0)), kOrigin);
  CHECK(s.confidence == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("energy matches a compensated log-sum-exp") {
  Rng rng(RngSeed{31});
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = 3 + rng.below(8);
    std::vector<double> z(k);
    for (auto& v : z) v = rng.normal() * 5.0;
    const auto s = confidence::score(conf(Kind::Energy, 1.0), with_bias(z), kOrigin);
    const double ref = static_cast<double>(oracle::lse_compensated(z));
    CHECK(oracle::rel_err(s.confidence, ref) <= 1e-10);
  }
}

TEST_CASE("energy temperature scales") {
  const std::vector<double> z{1.0, 3.0, -2.0};
  const auto s = confidence::score(conf(Kind::Energy, 2.0), with_bias(z), kOrigin);
  const std::vector<double> half{0.5, 1.5, -1.0};
  CHECK(oracle::rel_err(s.confidence, 2.0 * static_cast<double>(oracle::lse_compensated(half))) <= 1e-12);
}

TEST_CASE("log-sum-exp is shift safe") {
  Rng rng(RngSeed{32});
  for (int t = 0; t < 50; ++t) {
    std::vector<double> z(6);
    for (auto& v : z) v = rng.normal() * 3.0;
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> shifted(z);
    for (auto& v : shifted) v -= zmax;
    CHECK(std::abs(confidence::log_sum_exp(z) - zmax - confidence::log_sum_exp(shifted)) <= 1e-12);
    auto p = confidence::softmax(z), q = confidence::softmax(shifted);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(p[i] - q[i]) <= 1e-12);
  }
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(confidence::log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("softmax and energy rank binary points identically") {
  Rng rng(RngSeed{33});
  auto m = model::LinearModel::zeros(2, 3);
  for (auto& w : m.weights) w = rng.normal();
  std::vector<double> soft, energy;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(3);
    for (auto& v : x) v = rng.normal();
    soft.push_back(confidence::score(conf(Kind::Softmax), m, x).confidence);
    energy.push_back(confidence::score(conf(Kind::Energy), m, x).confidence);
  }
  CHECK(oracle::spearman(soft, energy) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("every kind is oriented: thresholds give nested accept sets") {
  Rng rng(RngSeed{34});
  auto m = model::LinearModel::zeros(3, 4);
  for (auto& w : m.weights) w = rng.normal();
  auto platt = conf(Kind::Platt);
  platt.platt = {{2.0, -1.0}, {0.5, 0.0}, {1.0, 0.3}};
  for (const auto& cfg : {conf(Kind::AbsMargin), conf(Kind::Softmax),
                          conf(Kind::Energy), platt}) {
    std::vector<double> s;
    for (int i = 0; i < 200; ++i) {
      std::vector<double> x(4);
      for (auto& v : x) v = rng.normal();
      s.push_back(confidence::score(cfg, m, x).confidence);
    }
    std::vector<double> ts(s);
    std::sort(ts.begin(), ts.end());
    for (std::size_t a = 0; a + 1 < ts.size(); a += 17) {
      const double t = ts[a], t2 = ts[a + 1];
      for (double v : s) CHECK((v >= t2) <= (v >= t));
    }
  }
}

TEST_CASE("shift_nonnegative") {
  std::vector<double> s{-2.0, 0.5, 1.0};
  CHECK(confidence::shift_nonnegative(s) == 2.0);
  CHECK(s[0] == 0.0);
  CHECK(s[2] == 3.0);
  std::vector<double> pos{0.0, 1.0};
  CHECK(confidence::shift_nonnegative(pos) == 0.0);
}

TEST_CASE("platt recovers a=1, b=0") {
  Rng rng(RngSeed{35});
  std::vector<double> m;
  std::vector<int> c;
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.normal() * 2.0;
    m.push_back(v);
    c.push_back(rng.uniform() < 1.0 / (1.0 + std::exp(-v)));
  }
  const auto f = confidence::fit_sigmoid(m, c);
  CHECK(!f.fallback);
  CHECK(std::abs(f.params.a - 1.0) <= 0.1);
  CHECK(std::abs(f.params.b) <= 0.1);
  CHECK(f.iterations <= 100);
}

TEST_CASE("platt on separated margins is confident") {
  std::vector<double> m;
  std::vector<int> c;
  for (int i = 0; i < 200; ++i) {
    const double v = 0.1 + i * 0.01;
    m.push_back(v);
    c.push_back(1);
    m.push_back(-v);
    c.push_back(0);
  }
  const auto f = confidence::fit_sigmoid(m, c);
  CHECK(f.params.a > 5.0);
  const double p = 1.0 / (1.0 + std::exp(-(f.params.a * 0.5 + f.params.b)));
  CHECK(p > 0.99);
}

TEST_CASE("platt on flipped outcomes has negative slope") {
  Rng rng(RngSeed{36});
  std::vector<double> m;
  std::vector<int> c;
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.normal();
    m.push_back(v);
    c.push_back(rng.uniform() < 1.0 / (1.0 + std::exp(v)));
  }
  CHECK(confidence::fit_sigmoid(m, c).params.a < 0.0);
}

TEST_CASE("platt falls back on single-outcome data") {
  std::vector<double> m{0.1, 0.2};
  std::vector<int> c{1, 1};
  const auto f = confidence::fit_sigmoid(m, c);
  CHECK(f.fallback);
  CHECK(f.params.a == 1.0);
  CHECK(f.params.b == 0.0);
}

TEST_CASE("fit_platt is per predicted class") {
  Rng rng(RngSeed{37});
  auto m = model::LinearModel::zeros(3, 2);
  m.weights = {1, 0, 0, 1, -1, -1};
  LabeledData cal;
  cal.num_classes = 3;
  cal.x = FeatureMatrix(0, 2);
  for (int i = 0; i < 600; ++i) {
    const double x[2] = {rng.normal(), rng.normal()};
    cal.x.append(x);
    const int pred = model::predict(m, x);
    cal.y.push_back(rng.uniform() < 0.8 ? pred : static_cast<int>(rng.below(3)));
  }
  const auto f = confidence::fit_platt(m, cal);
  CHECK(f.params.size() == 3);
  for (bool fb : f.fallback) CHECK(!fb);
}

TEST_CASE("non-finite logits are rejected") {
  auto m = with_bias({0.0, std::numeric_limits<double>::infinity(), 0.0});
  CHECK_THROWS_AS(confidence::score(conf(Kind::Softmax), m, kOrigin), NumericError);
}

#include <doctest.h>

#include <cmath>

#include "tbal/data.hpp"
#include "tbal/metrics.hpp"

using namespace tbal;

namespace {

LabeledData twenty() {
  LabeledData d;
  d.x = FeatureMatrix(0, 1);
  for (int i = 0; i < 20; ++i) {
    const double x[1] = {static_cast<double>(i)};
    d.x.append(x);
    d.y.push_back(i % 2);
  }
  return d;
}

}  // namespace

TEST_CASE("3 mistakes among 10 auto-labels on N=20") {
  engine::RunResult r{Pool(twenty()), ValidationSet()};
  engine::RoundRecord rec;
  rec.round = 1;
  for (std::size_t id = 0; id < 10; ++id) {
    const int truth = static_cast<int>(id % 2);
    const int label = id < 3 ? 1 - truth : truth;
    r.pool.mark_auto(id, label, 1);
    rec.auto_labeled.emplace_back(id, label);
  }
  rec.n_a = 10;
  rec.m_a = 3;
  r.rounds.push_back(rec);
  r.n_auto = 10;
  const auto rep = metrics::evaluate(r);
  CHECK(rep.mistakes == 3);
  CHECK(*rep.err_hat == 0.3);
  CHECK(rep.cov_hat == 0.5);
  CHECK(rep.err_hat.value() * static_cast<double>(rep.n_auto) == doctest::Approx(3.0));

  // per-round records that disagree with the states are rejected
  r.rounds[0].m_a = 2;
  CHECK_THROWS_AS(metrics::evaluate(r), IntegrityError);
}

TEST_CASE("nothing auto-labeled leaves the error undefined") {
  engine::RunResult r{Pool(twenty()), ValidationSet()};
  const auto rep = metrics::evaluate(r);
  CHECK(!rep.err_defined());
  CHECK(rep.cov_hat == 0.0);
}

TEST_CASE("everything labeled correctly") {
  engine::RunResult r{Pool(twenty()), ValidationSet()};
  engine::RoundRecord rec;
  for (std::size_t id = 0; id < 20; ++id) {
    r.pool.mark_auto(id, static_cast<int>(id % 2), 1);
    rec.auto_labeled.emplace_back(id, static_cast<int>(id % 2));
  }
  rec.n_a = 20;
  r.rounds.push_back(rec);
  r.n_auto = 20;
  const auto rep = metrics::evaluate(r);
  CHECK(*rep.err_hat == 0.0);
  CHECK(rep.cov_hat == 1.0);
}

TEST_CASE("evaluate rejects a foreign pool") {
  engine::RunResult r{Pool(twenty()), ValidationSet()};
  CHECK_THROWS_AS(metrics::evaluate(r, Pool(twenty())), IntegrityError);
}

TEST_CASE("summaries") {
  const double one[] = {0.4};
  CHECK(metrics::summarize(one).std == 0.0);
  const double two[] = {0.1, 0.3};
  const auto s = metrics::summarize(two);
  CHECK(s.mean == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(s.std == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
  const double a[] = {0.5, 0.1, 0.9, 0.3}, b[] = {0.9, 0.3, 0.1, 0.5};
  CHECK(metrics::summarize(a).mean == metrics::summarize(b).mean);
  CHECK(metrics::summarize(a).std == metrics::summarize(b).std);
  CHECK(std::isnan(metrics::summarize(std::span<const double>{}).mean));
}

TEST_CASE("summarize_trials skips undefined errors") {
  std::vector<metrics::MetricReport> reps(3);
  reps[0].err_hat = 0.1;
  reps[0].cov_hat = 0.5;
  reps[1].err_hat = 0.3;
  reps[1].cov_hat = 0.7;
  reps[2].cov_hat = 0.0;
  const auto t = metrics::summarize_trials(reps);
  CHECK(t.err_hat.count == 2);
  CHECK(t.err_hat.mean == doctest::Approx(0.2));
  CHECK(t.cov_hat.count == 3);
  CHECK(t.cov_hat.mean == doctest::Approx(0.4));
}

TEST_CASE("metrics agree with the pool on a real run") {
  const auto pts = data::gen_unit_ball(5, 3000, RngSeed{3});
  auto [pool, val] = data::split_pool_val(pts, 2000, 1000, RngSeed{3});
  engine::RunConfig cfg;
  cfg.seed_size = 20;
  cfg.batch_size = 10;
  cfg.budget = 100;
  cfg.train.normalized = true;
  cfg.train.fit_bias = false;
  const auto r = engine::run(pool, val, cfg, RngSeed{1});
  const auto rep = metrics::evaluate(r, r.pool);
  std::size_t m = 0;
  for (const auto& pr : rep.per_round) m += pr.m_a;
  CHECK(m == rep.mistakes);
  CHECK(rep.cov_hat == static_cast<double>(r.pool.counts().n_auto) / 2000.0);
}

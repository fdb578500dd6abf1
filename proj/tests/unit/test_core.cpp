#include <doctest.h>

#include "tbal/core.hpp"

using namespace tbal;

namespace {
LabeledData ten_points() {
  LabeledData d;
  d.x = FeatureMatrix(0, 2);
  for (int i = 0; i < 10; ++i) {
    const double row[2] = {static_cast<double>(i), 1.0};
    d.x.append(row);
    d.y.push_back(i % 2);
  }
  return d;
}
}  // namespace

TEST_CASE("fresh pool is all unlabeled") {
  Pool p(ten_points());
  CHECK(partition_counts(p) == PartitionCounts{0, 0, 10});
  CHECK(p.counts() == PartitionCounts{0, 0, 10});
}

TEST_CASE("3 auto and 2 human") {
  Pool p(ten_points());
  Oracle o(p);
  for (std::size_t i = 0; i < 3; ++i) p.mark_auto(i, 1, 1);
  CHECK(o.query(5, 0) == 1);
  CHECK(o.query(6, 0) == 0);
  CHECK(partition_counts(p) == PartitionCounts{3, 2, 5});
  CHECK(p.counts() == partition_counts(p));
  CHECK(o.queries() == 2);
  CHECK(p.state(5).provenance == Provenance::Human);
  CHECK(p.state(0).round == 1);
}

TEST_CASE("transitions never leave a labeled state") {
  Pool p(ten_points());
  Oracle o(p);
  p.mark_auto(0, 1, 1);
  o.query(1, 0);
  CHECK_THROWS_AS(p.mark_auto(0, 0, 2), IntegrityError);
  CHECK_THROWS_AS(o.query(0, 2), IntegrityError);
  CHECK_THROWS_AS(p.mark_auto(1, 0, 2), IntegrityError);
  CHECK_THROWS_AS(o.query(1, 2), IntegrityError);
}

TEST_CASE("pool copies share points but not states") {
  Pool a(ten_points());
  Pool b = a;
  b.mark_auto(3, 0, 1);
  CHECK(a.is_unlabeled(3));
  CHECK(a.same_points(b));
  CHECK(!a.same_points(Pool(ten_points())));
}

TEST_CASE("unlabeled ids are ascending") {
  Pool p(ten_points());
  p.mark_auto(4, 0, 1);
  const auto ids = p.unlabeled_ids();
  CHECK(ids.size() == 9);
  CHECK(std::is_sorted(ids.begin(), ids.end()));
  CHECK(std::find(ids.begin(), ids.end(), 4) == ids.end());
}

TEST_CASE("validation deactivation only shrinks") {
  ValidationSet v(ten_points());
  CHECK(v.active_count() == 10);
  v.deactivate(2);
  v.deactivate(2);
  CHECK(v.active_count() == 9);
  CHECK(!v.active(2));
  CHECK(v.active_indices().size() == 9);
}

TEST_CASE("labeled data validation") {
  auto d = ten_points();
  d.y.pop_back();
  CHECK_THROWS_AS(d.validate(), InputError);
  auto e = ten_points();
  e.y[0] = 5;
  CHECK_THROWS_AS(e.validate(), InputError);
}

TEST_CASE("subset keeps rows and labels") {
  const auto d = ten_points();
  const std::size_t idx[] = {7, 2};
  const auto s = d.subset(idx);
  CHECK(s.size() == 2);
  CHECK(s.x.row(0)[0] == 7.0);
  CHECK(s.y[1] == 0);
}

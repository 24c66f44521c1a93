#include <cmath>
#include <vector>

#include "doctest.h"

#include "cpn/error.hpp"
#include "cpn/fom.hpp"
#include "cpn/rng.hpp"

using namespace cpn;

namespace {

SpecItem hard(const std::string& name, Direction d, double c) { return {name, d, c, SpecRole::hard_constraint}; }
SpecItem target(const std::string& name, Direction d, double c) { return {name, d, c, SpecRole::optimization_target}; }

}  // namespace

TEST_CASE("spec set validation") {
  CHECK_THROWS_AS(SpecSet({}), ConfigError);
  CHECK_THROWS_AS(SpecSet({hard("a", Direction::maximize, 1), hard("a", Direction::minimize, 1)}), ConfigError);
  CHECK_THROWS_AS(SpecSet({hard("a", Direction::maximize, 0)}), ConfigError);
  CHECK_THROWS_AS(SpecSet({hard("a", Direction::maximize, -1)}), ConfigError);
  const SpecSet s({target("i", Direction::minimize, 1), hard("g", Direction::maximize, 2)});
  CHECK(s.index_of("g") == 1);
  CHECK_THROWS_AS(s.index_of("nope"), ConfigError);
  CHECK(s.hard_indices() == std::vector<std::size_t>{1});
  CHECK(s.target_indices() == std::vector<std::size_t>{0});
}

TEST_CASE("score_item: spec examples") {
  CHECK(score_item(hard("g", Direction::maximize, 100), 120, false) == 1.0);
  CHECK(score_item(hard("g", Direction::maximize, 100), 50, false) == 0.5);
  CHECK(score_item(target("i", Direction::minimize, 100), 25, true) == 4.0);
  CHECK(score_item(target("i", Direction::minimize, 100), 25, false) == 1.0);
  CHECK(score_item(target("i", Direction::minimize, 100), 400, false) == 0.25);
  CHECK(score_item(target("g", Direction::maximize, 10), 30, true) == 3.0);
  CHECK(score_item(hard("i", Direction::minimize, 10), 20, true) == 0.5);
}

TEST_CASE("score_item: degenerate metrics") {
  // zero and negative values are floored, not divided by
  const double s = score_item(target("i", Direction::minimize, 1.0), 0.0, true);
  CHECK(std::isfinite(s));
  CHECK(s == doctest::Approx(1.0 / kMetricFloor));
  CHECK(score_item(hard("g", Direction::maximize, 1.0), -3.0, false) == doctest::Approx(kMetricFloor));
  CHECK_THROWS_AS(score_item(hard("g", Direction::maximize, 1.0), NAN, false), DegenerateMetricError);
  CHECK_THROWS_AS(score_item(hard("g", Direction::maximize, 1.0), INFINITY, false), DegenerateMetricError);
}

TEST_CASE("fom: spec examples") {
  const SpecSet three({hard("a", Direction::maximize, 10), hard("b", Direction::minimize, 5),
                       target("t", Direction::minimize, 2)});
  CHECK(fom(three, std::vector<double>{10, 5, 2}) == 3.0);
  // one hard constraint at half its threshold: targets stay clipped
  CHECK(fom(three, std::vector<double>{5, 5, 2}) == 2.5);
  CHECK(fom(three, std::vector<double>{5, 5, 1}) == 2.5);

  std::vector<SpecItem> six;
  for (int i = 0; i < 5; ++i) six.push_back(hard("h" + std::to_string(i), Direction::maximize, 1.0));
  six.push_back(target("cost", Direction::minimize, 100.0));
  const SpecSet s6(six);
  CHECK(fom(s6, std::vector<double>{1, 2, 3, 4, 5, 25}) == 9.0);

  CHECK_THROWS_AS(fom(three, MetricVector{{"a", 1.0}, {"b", 1.0}}), ConfigError);
  CHECK_THROWS_AS(fom(three, MetricVector{{"a", 1.0}, {"b", 1.0}, {"t", 1.0}, {"x", 1.0}}), ConfigError);
  CHECK(fom(three, MetricVector{{"a", 10.0}, {"b", 5.0}, {"t", 1.0}}) == 4.0);
}

TEST_CASE("constraint_margin: spec examples") {
  CHECK(constraint_margin(hard("a", Direction::maximize, 7), 7) == 0.0);
  CHECK(constraint_margin(hard("a", Direction::minimize, 7), 2) == 5.0);
  CHECK(constraint_margin(hard("a", Direction::maximize, 7), 4) == -3.0);
  CHECK_THROWS_AS(constraint_margin(target("t", Direction::maximize, 7), 4), ContractError);
}

namespace {

SpecSet random_specs(Rng& rng) {
  std::vector<SpecItem> items;
  const auto n = 1 + rng.uniform_index(7);
  for (std::uint64_t i = 0; i < n; ++i) {
    items.push_back({"m" + std::to_string(i), rng.uniform01() < 0.5 ? Direction::maximize : Direction::minimize,
                     std::exp(rng.uniform(-5, 5)),
                     rng.uniform01() < 0.7 ? SpecRole::hard_constraint : SpecRole::optimization_target});
  }
  return SpecSet(items);
}

std::vector<double> random_metrics(const SpecSet& s, Rng& rng) {
  std::vector<double> m;
  for (const auto& item : s.items()) m.push_back(item.threshold * std::exp(rng.uniform(-2, 2)));
  return m;
}

}  // namespace

TEST_CASE("fom property: monotone in each metric along its direction") {
  Rng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const SpecSet s = random_specs(rng);
    auto m = random_metrics(s, rng);
    const double before = fom(s, m);
    const auto j = rng.uniform_index(s.size());
    const double factor = std::exp(rng.uniform(0.0, 2.0));
    // "better" move along the metric's direction
    m[j] = s[j].direction == Direction::maximize ? m[j] * factor : m[j] / factor;
    CHECK(fom(s, m) >= before - 1e-12 * std::abs(before));
  }
}

TEST_CASE("fom property: feasible points score exactly 1 per hard constraint") {
  Rng rng(32);
  for (int trial = 0; trial < 1000; ++trial) {
    const SpecSet s = random_specs(rng);
    auto m = random_metrics(s, rng);
    for (auto i : s.hard_indices()) {
      const double slack = std::exp(rng.uniform(0.0, 1.0));
      m[i] = s[i].direction == Direction::maximize ? s[i].threshold * slack : s[i].threshold / slack;
    }
    REQUIRE(all_hard_met(s, m));
    double targets = 0.0;
    for (auto i : s.target_indices()) targets += score_item(s[i], m[i], true);
    CHECK(fom(s, m) == doctest::Approx(static_cast<double>(s.hard_indices().size()) + targets));
    CHECK(objective_score(s, m) == doctest::Approx(targets));
  }
}

TEST_CASE("fom property: hard scores in (0, 1] and margin sign matches satisfaction") {
  Rng rng(33);
  for (int trial = 0; trial < 5000; ++trial) {
    const SpecItem spec = hard("x", rng.uniform01() < 0.5 ? Direction::maximize : Direction::minimize,
                               std::exp(rng.uniform(-5, 5)));
    const double v = spec.threshold * std::exp(rng.uniform(-3, 3));
    const double s = score_item(spec, v, rng.uniform01() < 0.5);
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
    CHECK((constraint_margin(spec, v) >= 0.0) == (s == 1.0));
  }
}

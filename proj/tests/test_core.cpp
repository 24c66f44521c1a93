#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"

#include "cpn/design_space.hpp"
#include "cpn/error.hpp"
#include "cpn/rng.hpp"
#include "cpn/sampling.hpp"

using namespace cpn;

TEST_CASE("rng: SplitMix64 reference outputs") {
  // Published SplitMix64 sequence for seed 0.
  Rng rng(0);
  CHECK(rng.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next_u64() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next_u64() == 0x06C45D188009454FULL);
}

TEST_CASE("rng: same seed same stream, forks independent of parent position") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng parent(7);
  const Rng early = parent.fork(3);
  for (int i = 0; i < 10; ++i) parent.next_u64();
  Rng late = parent.fork(3);
  Rng early_copy = early;
  for (int i = 0; i < 20; ++i) CHECK(early_copy.next_u64() == late.next_u64());

  Rng c1 = Rng(7).fork(1), c2 = Rng(7).fork(2);
  CHECK(c1.next_u64() != c2.next_u64());
}

TEST_CASE("rng: uniform01 in [0,1) and uniform_index in range") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.uniform_index(7) < 7);
  }
  CHECK_THROWS_AS(rng.uniform_index(0), ContractError);
}

TEST_CASE("design space: validation and unit maps") {
  CHECK_THROWS_AS(DesignSpace({0.0, 1.0}, {1.0}), ContractError);
  CHECK_THROWS_AS(DesignSpace({1.0}, {1.0}), ContractError);
  CHECK_THROWS_AS(DesignSpace({}, {}), ContractError);

  const DesignSpace s({0.0, -2.0}, {10.0, 2.0});
  CHECK(s.dim() == 2);
  CHECK(s.midpoint() == std::vector<double>{5.0, 0.0});
  const auto u = s.to_unit(std::vector<double>{2.5, 1.0});
  CHECK(u[0] == doctest::Approx(0.25));
  CHECK(u[1] == doctest::Approx(0.75));
  const auto back = s.from_unit(u);
  CHECK(back[0] == doctest::Approx(2.5));
  CHECK(back[1] == doctest::Approx(1.0));
}

TEST_CASE("design point: clamps out-of-bound coordinates") {
  const DesignSpace s({0.0, 0.0}, {1.0, 1.0});
  const DesignPoint p(s, {1.0 + 1e-15, -0.5});
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
  CHECK(s.contains(p.coords()));
  CHECK_THROWS_AS(DesignPoint(s, {0.5}), ContractError);
}

TEST_CASE("observation set: incumbent tracks the running max under random appends") {
  const DesignSpace s({0.0}, {1.0});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    ObservationSet obs;
    CHECK_THROWS_AS(obs.incumbent_value(), ContractError);
    std::vector<double> seen;
    const auto n = 1 + rng.uniform_index(40);
    for (std::uint64_t i = 0; i < n; ++i) {
      // coarse values force ties
      const double v = std::floor(rng.uniform(-5.0, 5.0));
      obs.append(DesignPoint(s, {rng.uniform01()}), v);
      seen.push_back(v);
      const double best = *std::max_element(seen.begin(), seen.end());
      CHECK(obs.incumbent_value() == best);
      CHECK(obs.values()[obs.incumbent_index()] == best);
      CHECK(obs.size() == seen.size());
    }
    CHECK(obs.values() == seen);
  }
}

TEST_CASE("uniform_sample: containment, determinism, degenerate bounds, law of large numbers") {
  const DesignSpace unit({0.0, 0.0}, {1.0, 1.0});
  Rng a(11), b(11);
  const auto p = uniform_sample(unit, 1, a);
  const auto q = uniform_sample(unit, 1, b);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == q[0]);
  CHECK(unit.contains(p[0].coords()));

  const double eps = 1e-9;
  const DesignSpace thin({3.0}, {3.0 + eps});
  Rng r(1);
  for (const auto& pt : uniform_sample(thin, 100, r)) CHECK(std::abs(pt[0] - 3.0) <= eps);

  const DesignSpace cube({0.0, 0.0, 0.0}, {10.0, 10.0, 10.0});
  Rng big(2024);
  const auto pts = uniform_sample(cube, 10000, big);
  for (std::size_t j = 0; j < 3; ++j) {
    double m = 0.0;
    for (const auto& pt : pts) m += pt[j];
    m /= 10000.0;
    CHECK(std::abs(m - 5.0) < 0.2);
  }
  CHECK_THROWS_AS(uniform_sample(unit, 0, big), ContractError);
}

namespace {

// Every stratum [k/n, (k+1)/n) of every dimension holds exactly one sample.
bool stratified(const std::vector<DesignPoint>& pts, const DesignSpace& s) {
  const std::size_t n = pts.size();
  for (std::size_t j = 0; j < s.dim(); ++j) {
    std::vector<int> count(n, 0);
    for (const auto& p : pts) {
      const double u = (p[j] - s.lower()[j]) / (s.upper()[j] - s.lower()[j]);
      auto k = static_cast<std::size_t>(std::floor(u * static_cast<double>(n)));
      if (k == n) k = n - 1;
      ++count[k];
    }
    if (std::any_of(count.begin(), count.end(), [](int c) { return c != 1; })) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("latin_hypercube: n=4 on [0,1] occupies each quarter once") {
  const DesignSpace s({0.0}, {1.0});
  Rng rng(3);
  auto pts = latin_hypercube(s, 4, rng);
  std::vector<double> v;
  for (const auto& p : pts) v.push_back(p[0]);
  std::sort(v.begin(), v.end());
  for (int k = 0; k < 4; ++k) {
    CHECK(v[k] >= 0.25 * k);
    CHECK(v[k] < 0.25 * (k + 1));
  }
  Rng one(4);
  const auto single = latin_hypercube(s, 1, one);
  CHECK(single.size() == 1);
  CHECK(s.contains(single[0].coords()));
}

TEST_CASE("latin_hypercube: n=100 in 5-D has empirical CDF within 1/n at stratum edges") {
  const DesignSpace s(std::vector<double>(5, 0.0), std::vector<double>(5, 1.0));
  Rng rng(9);
  const auto pts = latin_hypercube(s, 100, rng);
  for (std::size_t j = 0; j < 5; ++j) {
    for (int k = 0; k <= 100; ++k) {
      const double edge = k / 100.0;
      const auto below = std::count_if(pts.begin(), pts.end(), [&](const DesignPoint& p) { return p[j] < edge; });
      CHECK(std::abs(static_cast<double>(below) / 100.0 - edge) <= 0.01 + 1e-12);
    }
  }
}

TEST_CASE("latin_hypercube property: stratified for every n in [1, 1000]") {
  const DesignSpace s({-1.0, 0.0, 100.0}, {1.0, 1e-6, 200.0});
  Rng rng(77);
  bool all = true;
  for (std::size_t n = 1; n <= 1000; ++n) {
    if (!stratified(latin_hypercube(s, n, rng), s)) {
      all = false;
      FAIL_CHECK("stratification broken at n=" << n);
      break;
    }
  }
  CHECK(all);
}

TEST_CASE("train_test_split: sizes, disjointness, exhaustiveness, determinism") {
  Rng rng(1);
  auto s = train_test_split(10, 0.8, rng);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);

  Rng rng2(1);
  auto half = train_test_split(2, 0.5, rng2);
  CHECK(half.train.size() == 1);
  CHECK(half.test.size() == 1);

  Rng r500(5);
  const auto big = train_test_split(500, 0.8, r500);
  CHECK(big.train.size() == 400);
  CHECK(big.test.size() == 100);
  std::set<std::size_t> all(big.train.begin(), big.train.end());
  for (auto i : big.test) CHECK(all.insert(i).second);
  std::set<std::size_t> expected;
  for (std::size_t i = 0; i < 500; ++i) expected.insert(i);
  CHECK(all == expected);

  Rng again(5);
  const auto repeat = train_test_split(500, 0.8, again);
  CHECK(repeat.train == big.train);
  CHECK(repeat.test == big.test);

  Rng bad(0);
  CHECK_THROWS_AS(train_test_split(1, 0.5, bad), ContractError);
  CHECK_THROWS_AS(train_test_split(10, 0.99, bad), ContractError);
  CHECK_THROWS_AS(train_test_split(10, 0.0, bad), ContractError);
  CHECK_THROWS_AS(train_test_split(10, 1.0, bad), ContractError);
}

TEST_CASE("train_test_split on a dataset keeps rows paired") {
  Dataset d;
  for (int i = 0; i < 20; ++i) {
    d.x.push_back({static_cast<double>(i)});
    d.y.push_back(10.0 * i);
  }
  Rng rng(2);
  const auto [train, test] = train_test_split(d, 0.8, rng);
  CHECK(train.size() == 16);
  CHECK(test.size() == 4);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train.y[i] == 10.0 * train.x[i][0]);
  for (std::size_t i = 0; i < test.size(); ++i) CHECK(test.y[i] == 10.0 * test.x[i][0]);
}

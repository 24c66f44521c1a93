#include <cmath>
#include <future>
#include <set>
#include <vector>

#include "doctest.h"

#include "cpn/error.hpp"
#include "cpn/fom.hpp"
#include "cpn/primitives.hpp"
#include "cpn/rng.hpp"
#include "cpn/sampling.hpp"
#include "cpn/testbench.hpp"

using namespace cpn;
namespace pr = cpn::primitives;

TEST_CASE("exp_law: examples and clamp") {
  CHECK(pr::exp_law(0.0, 1.3, 0.026) == 1.0);
  CHECK(pr::exp_law(1.3 * 0.026, 1.3, 0.026) == doctest::Approx(std::exp(1.0)));
  CHECK(pr::exp_law(0.2, 1.5, 0.026) == doctest::Approx(std::exp(0.2 / (1.5 * 0.026))).epsilon(1e-14));
  CHECK(pr::exp_law(0.2, 1.5, 0.026) == doctest::Approx(168.71).epsilon(1e-4));
  CHECK(pr::exp_law(100.0, 1.0, 0.026) == std::exp(40.0));
  CHECK_THROWS_AS(pr::exp_law(0.1, 0.0, 0.026), ContractError);
}

TEST_CASE("power_law: examples") {
  CHECK(pr::power_law(1e-6, 1e-6, -0.1, 2.0) == 0.0);
  CHECK(pr::power_law(1e-6, 1e-6, 0.0, 1.5) == 0.0);
  CHECK(pr::power_law(2e-6, 2e-6, 1.0, 2.0) == 1.0);
  CHECK(pr::power_law(10e-6, 1e-6, 0.3, 2.0) == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("rational_response: DC limit, corner identity, direct formula") {
  const double poles1[] = {1e3};
  auto dc = pr::rational_response(1e-9, 1000.0, poles1, {});
  CHECK(dc.magnitude_db == doctest::Approx(60.0));
  CHECK(dc.phase_deg == doctest::Approx(0.0).epsilon(1e-9));

  auto corner = pr::rational_response(1e3, 1.0, poles1, {});
  CHECK(corner.magnitude_db == doctest::Approx(-10.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(corner.phase_deg == doctest::Approx(-45.0));

  const double poles[] = {1e3, 1e6};
  const auto r = pr::rational_response(1e4, 1000.0, poles, {});
  const double expect_db = 60.0 - 10.0 * std::log10(1.0 + 100.0) - 10.0 * std::log10(1.0 + 1e-4);
  const double expect_ph = -(std::atan(10.0) + std::atan(0.01)) * 180.0 / std::numbers::pi;
  CHECK(r.magnitude_db == doctest::Approx(expect_db).epsilon(1e-13));
  CHECK(r.phase_deg == doctest::Approx(expect_ph).epsilon(1e-13));

  const double zeros[] = {1e5};
  const auto z = pr::rational_response(1e5, 1.0, {}, zeros);
  CHECK(z.magnitude_db == doctest::Approx(10.0 * std::log10(2.0)));
  CHECK(z.phase_deg == doctest::Approx(45.0));
}

TEST_CASE("rational_response property: magnitude nonincreasing in f without zeros") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> poles;
    const auto n = 1 + rng.uniform_index(4);
    for (std::uint64_t i = 0; i < n; ++i) poles.push_back(std::pow(10.0, rng.uniform(0, 9)));
    double prev = INFINITY;
    for (double lf = -2; lf <= 12; lf += 0.05) {
      const double m = pr::rational_response(std::pow(10.0, lf), 100.0, poles, {}).magnitude_db;
      CHECK(m <= prev + 1e-12);
      prev = m;
    }
  }
}

TEST_CASE("unity_gain_crossover: single pole matches the analytic solution") {
  const double poles[] = {1e3};
  const auto c = pr::unity_gain_crossover(1000.0, poles, {});
  const double analytic = 1e3 * std::sqrt(1000.0 * 1000.0 - 1.0);
  CHECK(c.bounded);
  CHECK(c.frequency == doctest::Approx(analytic).epsilon(1e-6));
  CHECK(std::abs(pr::rational_response(c.frequency, 1000.0, poles, {}).magnitude_db) < 1e-6);
  CHECK(c.phase_margin_deg == doctest::Approx(180.0 - std::atan(analytic / 1e3) * 180.0 / std::numbers::pi));

  const auto unity = pr::unity_gain_crossover(1.0, poles, {});
  CHECK(unity.frequency == pr::kCrossoverLow);

  const auto unbounded = pr::unity_gain_crossover(1e30, poles, {});
  CHECK_FALSE(unbounded.bounded);
  CHECK(unbounded.frequency == pr::kCrossoverHigh);
}

TEST_CASE("unity_gain_crossover: two poles match a dense frequency sweep") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const double a0 = std::pow(10.0, rng.uniform(1, 5));
    const double poles[] = {std::pow(10.0, rng.uniform(1, 4)), std::pow(10.0, rng.uniform(5, 8))};
    const auto c = pr::unity_gain_crossover(a0, poles, {});
    double best_f = 0.0, best = INFINITY;
    for (double lf = -2; lf <= 12; lf += 1e-5) {
      const double f = std::pow(10.0, lf);
      const double m = std::abs(pr::rational_response(f, a0, poles, {}).magnitude_db);
      if (m < best) {
        best = m;
        best_f = f;
      }
    }
    CHECK(std::abs(c.frequency - best_f) <= 1e-3 * best_f);
  }
}

TEST_CASE("regime_indicator: examples and bounds") {
  CHECK(pr::regime_indicator(0.45, 0.45) == 0.5);
  CHECK(pr::regime_indicator(0.55, 0.45) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(pr::regime_indicator(0.44, 0.45) == doctest::Approx(1.0 / (1.0 + std::exp(2.0))).epsilon(1e-12));
  double prev = 0.0;
  for (double v = -1.0; v <= 2.0; v += 1e-3) {
    const double s = pr::regime_indicator(v, 0.45);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("registry: six testbenches with the expected dimensions") {
  const auto& reg = registry();
  const std::map<std::string, std::size_t> expected = {
      {"ota2-analytic", 12}, {"ota3-analytic", 18}, {"bandgap-analytic", 20},
      {"gm-highdim", 53},    {"ldo-regime", 21},    {"chargepump-regime", 36}};
  REQUIRE(reg.size() == expected.size());
  for (const auto& [name, dim] : expected) {
    const auto& tb = find_testbench(name);
    CHECK(tb.dim() == dim);
    CHECK(tb.variable_names.size() == dim);
    CHECK(tb.name == name);
  }
  CHECK_THROWS_AS(find_testbench("spice"), ConfigError);
}

TEST_CASE("registry: spec structure per testbench") {
  auto count = [](const Testbench& tb, SpecRole role) {
    std::size_t n = 0;
    for (const auto& s : tb.specs.items()) n += s.role == role;
    return n;
  };
  for (const auto& [name, tb] : registry()) {
    CAPTURE(name);
    CHECK(count(tb, SpecRole::optimization_target) == 1);
    CHECK(count(tb, SpecRole::hard_constraint) >= 2);
  }
  CHECK(find_testbench("ota2-analytic").specs[find_testbench("ota2-analytic").specs.index_of("current")].direction ==
        Direction::minimize);
  CHECK(find_testbench("gm-highdim").specs.target_indices().size() == 1);
  const auto& gm = find_testbench("gm-highdim");
  CHECK(gm.specs[gm.specs.target_indices()[0]].direction == Direction::maximize);
  for (const std::string n : {"ota3-analytic", "bandgap-analytic", "ldo-regime", "chargepump-regime"}) {
    const auto& tb = find_testbench(n);
    CHECK(tb.specs[tb.specs.target_indices()[0]].direction == Direction::minimize);
  }
}

TEST_CASE("every testbench is finite at the midpoint and deterministic") {
  for (const auto& [name, tb] : registry()) {
    CAPTURE(name);
    const auto mid = tb.space.midpoint();
    const auto a = evaluate_aligned(tb, mid);
    const auto b = evaluate(tb, DesignPoint(tb.space, mid));
    REQUIRE(a.size() == tb.specs.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::isfinite(a[i]));
      CHECK(b.at(tb.specs[i].name) == a[i]);
    }
  }
}

TEST_CASE("fom is finite over 10^4 LHS points on every testbench") {
  for (const auto& [name, tb] : registry()) {
    CAPTURE(name);
    Rng rng(10'000);
    std::size_t bad = 0;
    for (const auto& p : latin_hypercube(tb.space, 10'000, rng)) {
      const double f = fom(tb.specs, evaluate_aligned(tb, p.coords()));
      bad += !std::isfinite(f);
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("evaluation is pure: parallel batch equals sequential") {
  const auto& tb = find_testbench("chargepump-regime");
  Rng rng(3);
  const auto pts = latin_hypercube(tb.space, 64, rng);
  std::vector<std::vector<double>> seq;
  for (const auto& p : pts) seq.push_back(evaluate_aligned(tb, p.coords()));
  std::vector<std::future<std::vector<double>>> futures;
  for (const auto& p : pts) {
    futures.push_back(std::async(std::launch::async, [&tb, &p] { return evaluate_aligned(tb, p.coords()); }));
  }
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(futures[i].get() == seq[i]);
}

TEST_CASE("ota2: zero input overdrive puts the gain at its floor") {
  const auto& tb = find_testbench("ota2-analytic");
  auto x = tb.space.midpoint();
  const auto j = std::find(tb.variable_names.begin(), tb.variable_names.end(), "vgs_in") - tb.variable_names.begin();
  x[static_cast<std::size_t>(j)] = tb.space.lower()[static_cast<std::size_t>(j)];  // vgs at threshold
  CHECK(tb.metric("gain_db", x) == 1.0);
  CHECK(tb.metric("gain_db", tb.space.midpoint()) > 1.0);
}

TEST_CASE("bandgap: exponential branches dominate TC sensitivity at the midpoint") {
  const auto& tb = find_testbench("bandgap-analytic");
  const auto mid = tb.space.midpoint();
  const double base = tb.metric("tc_ppm", mid);
  auto delta = [&](const std::string& var) {
    auto x = mid;
    const auto j = static_cast<std::size_t>(std::find(tb.variable_names.begin(), tb.variable_names.end(), var) -
                                            tb.variable_names.begin());
    REQUIRE(j < x.size());
    x[j] *= 1.01;
    return std::abs(tb.metric("tc_ppm", x) - base);
  };
  double geometry = 0.0;
  for (const std::string v : {"w_m1", "l_m1", "w_m2", "l_m2", "w_amp", "l_amp"}) geometry = std::max(geometry, delta(v));
  double exponential = 0.0;
  for (const std::string v : {"v_exp_0", "v_exp_1", "v_exp_2", "v_exp_3"}) exponential = std::max(exponential, delta(v));
  CHECK(exponential > geometry);
}

TEST_CASE("generated testbenches record their seed and constants") {
  std::set<std::string> generated;
  for (const auto& [name, tb] : registry()) {
    if (tb.provenance == Provenance::generated) {
      generated.insert(name);
      CHECK(tb.seed != 0);
    }
    CHECK_FALSE(tb.constants.empty());
  }
  CHECK(generated == std::set<std::string>{"chargepump-regime", "gm-highdim"});
  // rebuilding from scratch reproduces the same functions
  const auto fresh = build_registry();
  for (const auto& [name, tb] : fresh) {
    const auto mid = tb.space.midpoint();
    CHECK(evaluate_aligned(tb, mid) == evaluate_aligned(find_testbench(name), mid));
    CHECK(tb.constants == find_testbench(name).constants);
  }
}

#include "cpn/testbench.hpp"

#include <cmath>

#include "cpn/error.hpp"
#include "testbenches/common.hpp"

namespace cpn {

double Testbench::metric(const std::string& metric_name, std::span<const double> x) const {
  return metrics(x).at(specs.index_of(metric_name));
}

std::map<std::string, Testbench> build_registry() {
  std::map<std::string, Testbench> out;
  for (auto make : {bench::make_ota2, bench::make_ota3, bench::make_bandgap, bench::make_gm_highdim, bench::make_ldo,
                    bench::make_chargepump}) {
    Testbench tb = make();
    auto name = tb.name;
    out.emplace(std::move(name), std::move(tb));
  }
  return out;
}

const std::map<std::string, Testbench>& registry() {
  static const std::map<std::string, Testbench> instance = build_registry();
  return instance;
}

const Testbench& find_testbench(const std::string& name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown testbench '" + name + "'");
  return it->second;
}

std::vector<double> evaluate_aligned(const Testbench& tb, std::span<const double> x) {
  if (x.size() != tb.dim()) throw ContractError("evaluate: point dimension does not match " + tb.name);
  auto values = tb.metrics(x);
  if (values.size() != tb.specs.size()) throw ContractError("evaluate: metric count mismatch in " + tb.name);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DegenerateMetricError(tb.name + ": metric '" + tb.specs[i].name + "' is not finite");
    }
  }
  return values;
}

MetricVector evaluate(const Testbench& tb, const DesignPoint& x) {
  return to_metric_vector(tb.specs, evaluate_aligned(tb, x.coords()));
}

nlohmann::json registry_manifest() {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [name, tb] : registry()) {
    nlohmann::json vars = nlohmann::json::array();
    for (std::size_t j = 0; j < tb.dim(); ++j) {
      vars.push_back({{"name", tb.variable_names[j]}, {"lower", tb.space.lower()[j]}, {"upper", tb.space.upper()[j]}});
    }
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& s : tb.specs.items()) {
      specs.push_back({{"name", s.name},
                       {"direction", s.direction == Direction::maximize ? "maximize" : "minimize"},
                       {"threshold", s.threshold},
                       {"role", s.role == SpecRole::hard_constraint ? "hard_constraint" : "optimization_target"}});
    }
    out.push_back({{"name", name},
                   {"dim", tb.dim()},
                   {"provenance", tb.provenance == Provenance::analytic ? "analytic" : "generated"},
                   {"seed", tb.seed},
                   {"variables", vars},
                   {"specs", specs},
                   {"constants", tb.constants}});
  }
  return out;
}

}  // namespace cpn

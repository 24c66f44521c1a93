#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpn/design_space.hpp"
#include "cpn/fom.hpp"

namespace cpn {

enum class Provenance { analytic, generated };

/// All metric values of one design, ordered like the owning SpecSet.
using MetricFunction = std::function<std::vector<double>(std::span<const double>)>;

/// A synthetic circuit: box-bounded design space in natural units, its specs,
/// and deterministic metric functions composed from the device primitives.
struct Testbench {
  std::string name;
  std::string description;
  DesignSpace space;
  std::vector<std::string> variable_names;
  SpecSet specs;
  MetricFunction metrics;
  Provenance provenance = Provenance::analytic;
  std::uint64_t seed = 0;
  /// Every constant the metric functions use, including seed-generated ones.
  nlohmann::json constants;

  std::size_t dim() const { return space.dim(); }
  /// Single metric by name.
  double metric(const std::string& name, std::span<const double> x) const;
};

/// The six registry testbenches, built from scratch.
std::map<std::string, Testbench> build_registry();

/// Process-wide registry, built on first use.
const std::map<std::string, Testbench>& registry();

/// Throws ConfigError for unknown names.
const Testbench& find_testbench(const std::string& name);

std::vector<double> evaluate_aligned(const Testbench& tb, std::span<const double> x);
MetricVector evaluate(const Testbench& tb, const DesignPoint& x);

/// Names, bounds, specs and constants of every registry testbench.
nlohmann::json registry_manifest();

}  // namespace cpn

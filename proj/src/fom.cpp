#include "cpn/fom.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cpn/error.hpp"
#include "cpn/log.hpp"

namespace cpn {

SpecSet::SpecSet(std::vector<SpecItem> items) : items_(std::move(items)) {
  if (items_.empty()) throw ConfigError("SpecSet: at least one item required");
  std::set<std::string> seen;
  for (const auto& item : items_) {
    if (item.name.empty()) throw ConfigError("SpecSet: empty spec name");
    if (!seen.insert(item.name).second) throw ConfigError("SpecSet: duplicate spec name '" + item.name + "'");
    if (!(item.threshold > 0.0) || !std::isfinite(item.threshold)) {
      throw ConfigError("SpecSet: threshold of '" + item.name + "' must be positive and finite");
    }
  }
}

std::size_t SpecSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].name == name) return i;
  }
  throw ConfigError("SpecSet: unknown spec '" + name + "'");
}

bool SpecSet::contains(const std::string& name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const SpecItem& s) { return s.name == name; });
}

std::vector<std::string> SpecSet::names() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& s : items_) out.push_back(s.name);
  return out;
}

std::vector<std::size_t> SpecSet::hard_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].role == SpecRole::hard_constraint) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SpecSet::target_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].role == SpecRole::optimization_target) out.push_back(i);
  }
  return out;
}

bool spec_met(const SpecItem& spec, double value) {
  return spec.direction == Direction::maximize ? value >= spec.threshold : value <= spec.threshold;
}

namespace {

double ratio(const SpecItem& spec, double value) {
  if (!std::isfinite(value)) throw DegenerateMetricError("metric '" + spec.name + "' is not finite");
  if (!(spec.threshold > 0.0)) {
    throw DegenerateMetricError("spec '" + spec.name + "' needs a positive threshold for ratio scoring");
  }
  if (value < kMetricFloor) {
    log::warn_once("degenerate-metric", "metric '" + spec.name + "' at or below the ratio floor; clamped to " +
                                            std::to_string(kMetricFloor));
    value = kMetricFloor;
  }
  return spec.direction == Direction::maximize ? value / spec.threshold : spec.threshold / value;
}

}  // namespace

double score_item(const SpecItem& spec, double value, bool all_hard_met) {
  const double r = ratio(spec, value);
  if (spec.role == SpecRole::optimization_target && all_hard_met) return r;
  return std::min(r, 1.0);
}

std::vector<double> align(const SpecSet& specs, const MetricVector& metrics) {
  if (metrics.size() != specs.size()) {
    for (const auto& [name, value] : metrics) {
      if (!specs.contains(name)) throw ConfigError("metric '" + name + "' has no matching spec");
    }
  }
  std::vector<double> out(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto it = metrics.find(specs[i].name);
    if (it == metrics.end()) throw ConfigError("missing metric '" + specs[i].name + "'");
    out[i] = it->second;
  }
  return out;
}

MetricVector to_metric_vector(const SpecSet& specs, std::span<const double> aligned) {
  MetricVector out;
  for (std::size_t i = 0; i < specs.size(); ++i) out.emplace(specs[i].name, aligned[i]);
  return out;
}

bool all_hard_met(const SpecSet& specs, std::span<const double> aligned) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].role == SpecRole::hard_constraint && !spec_met(specs[i], aligned[i])) return false;
  }
  return true;
}

double fom(const SpecSet& specs, std::span<const double> aligned) {
  if (aligned.size() != specs.size()) throw ConfigError("fom: metric count does not match spec count");
  const bool feasible = all_hard_met(specs, aligned);
  double sum = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) sum += score_item(specs[i], aligned[i], feasible);
  return sum;
}

double fom(const SpecSet& specs, const MetricVector& metrics) { return fom(specs, align(specs, metrics)); }

double constraint_margin(const SpecItem& spec, double value) {
  if (spec.role != SpecRole::hard_constraint) {
    throw ContractError("constraint_margin: '" + spec.name + "' is an optimization target");
  }
  return spec.direction == Direction::maximize ? value - spec.threshold : spec.threshold - value;
}

double objective_score(const SpecSet& specs, std::span<const double> aligned) {
  double sum = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].role == SpecRole::optimization_target) sum += ratio(specs[i], aligned[i]);
  }
  return sum;
}

}  // namespace cpn

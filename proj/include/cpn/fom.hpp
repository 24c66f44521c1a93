#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace cpn {

enum class Direction { maximize, minimize };
enum class SpecRole { hard_constraint, optimization_target };

/// Metric values at or below this are clamped before ratio scoring.
inline constexpr double kMetricFloor = 1e-12;

struct SpecItem {
  std::string name;
  Direction direction = Direction::maximize;
  double threshold = 1.0;
  SpecRole role = SpecRole::hard_constraint;
};

class SpecSet {
 public:
  /// Throws ConfigError on empty sets, duplicate names or nonpositive thresholds.
  explicit SpecSet(std::vector<SpecItem> items);

  const std::vector<SpecItem>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  const SpecItem& operator[](std::size_t i) const { return items_[i]; }

  /// Throws ConfigError for unknown names.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  std::vector<std::size_t> hard_indices() const;
  std::vector<std::size_t> target_indices() const;

 private:
  std::vector<SpecItem> items_;
};

using MetricVector = std::map<std::string, double>;

/// Raw satisfaction of a single spec (value >= C when maximizing, value <= C when minimizing).
bool spec_met(const SpecItem& spec, double value);

/// Per-spec score s_i. Hard constraints are clipped at 1; optimization targets are
/// clipped until all hard constraints hold, then reported as the plain ratio.
double score_item(const SpecItem& spec, double value, bool all_hard_met);

/// Metric values ordered as in `specs`. Throws ConfigError on missing or extra names.
std::vector<double> align(const SpecSet& specs, const MetricVector& metrics);
MetricVector to_metric_vector(const SpecSet& specs, std::span<const double> aligned);

bool all_hard_met(const SpecSet& specs, std::span<const double> aligned);

/// Sum of per-spec scores.
double fom(const SpecSet& specs, std::span<const double> aligned);
double fom(const SpecSet& specs, const MetricVector& metrics);

/// Signed distance from the threshold, nonnegative iff the hard constraint holds.
/// Throws ContractError for optimization targets.
double constraint_margin(const SpecItem& spec, double value);

/// Sum of the unclipped target ratios: what the targets contribute once feasible.
double objective_score(const SpecSet& specs, std::span<const double> aligned);

}  // namespace cpn

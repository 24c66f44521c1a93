#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpn/fom.hpp"
#include "cpn/posterior.hpp"
#include "cpn/rng.hpp"
#include "cpn/surrogate.hpp"
#include "cpn/testbench.hpp"

namespace cpn {

enum class Strategy { direct_fom, metric_decomposed, constraint_decomposed };
enum class Acquisition { ei, dei };

Strategy parse_strategy(const std::string& text);
std::string to_string(Strategy strategy);
Acquisition parse_acquisition(const std::string& text);
std::string to_string(Acquisition acquisition);

struct RunConfig {
  std::string testbench;
  Strategy strategy = Strategy::direct_fom;
  BackendKind backend = BackendKind::khist;
  /// Command line of the external backend process (backend = external).
  std::string backend_command;
  Acquisition acquisition = Acquisition::dei;
  std::size_t budget = 400;
  std::size_t init_count = 5;
  std::size_t candidate_count = 2048;
  std::size_t bins = kDefaultBins;
  /// Joint samples per candidate for metric_decomposed.
  std::size_t fom_samples = 256;
  std::uint64_t seed = 0;
  /// Replaces the registry testbench with an external evaluator when set.
  std::string external_eval_command;
  double timeout_seconds = 600.0;

  /// Throws ConfigError on budget < init_count, init_count < 1,
  /// candidate_count < 1, bins < 1 or fom_samples < 1.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);

enum class Phase { init, acquisition, fallback, random };
std::string to_string(Phase phase);
Phase parse_phase(const std::string& text);

struct PhaseTimings {
  double surrogate_seconds = 0.0;
  double acquisition_seconds = 0.0;
  double evaluation_seconds = 0.0;
};

struct IterationRecord {
  /// 1-based, counting every evaluation including initialization.
  std::size_t iteration = 0;
  Phase phase = Phase::init;
  std::vector<double> x;
  /// Aligned with the trace's metric names.
  std::vector<double> metrics;
  double fom = 0.0;
  double incumbent_fom = 0.0;
  std::optional<double> acquisition_value;
  std::size_t surrogate_queries = 0;
  /// Context size after this iteration's update.
  std::size_t context_size = 0;
  std::string fallback_reason;
  PhaseTimings timings;
};

struct RunTrace {
  static constexpr int kSchemaVersion = 1;

  /// "random_search" or "<strategy>+<backend>+<acq>".
  std::string method;
  RunConfig config;
  std::vector<std::string> metric_names;
  /// Surrogates queried per acquisition iteration (0 for random search).
  std::size_t surrogate_instances = 0;
  std::vector<IterationRecord> records;

  /// First record with the largest fom.
  std::size_t best_index() const;
  double final_fom() const { return records.at(best_index()).fom; }
};

nlohmann::json to_json(const RunTrace& trace);
RunTrace trace_from_json(const nlohmann::json& j);

/// Method label used in traces and reports.
std::string method_label(const RunConfig& config);

/// Number of surrogate instances the strategy needs for this spec set:
/// 1, N_m or N_c + 1.
std::size_t surrogate_instance_count(Strategy strategy, const SpecSet& specs);

/// Per-candidate expected improvement of the predicted fom. acq = ei uses the
/// Gaussian with the posterior's moments.
std::vector<double> acquire_direct(std::span<const DiscretePosterior> posteriors, Acquisition acq, double f_star);

/// Posterior centers are either metric values or their natural logarithm.
enum class MetricScale { linear, log };

/// Monte Carlo expected fom improvement from independent per-metric posteriors.
/// posteriors[i][c] is metric i at candidate c, in spec order. Each of the
/// `samples` joint draws takes one inverse-CDF sample per metric.
std::vector<double> acquire_metric_decomposed(const std::vector<std::vector<DiscretePosterior>>& posteriors,
                                              const SpecSet& specs, double f_star, std::size_t samples, Rng& rng,
                                              MetricScale scale = MetricScale::linear);

/// Expected improvement of the objective score times the product of the
/// hard-constraint feasibility masses P(margin >= 0). margins[i][c] is the
/// i-th hard constraint at candidate c.
std::vector<double> acquire_constraint_decomposed(std::span<const DiscretePosterior> objective,
                                                  const std::vector<std::vector<DiscretePosterior>>& margins,
                                                  double f_star_objective, Acquisition acq = Acquisition::dei);

/// Index of the largest score; ties go to the lowest index.
std::size_t select_next(std::span<const double> scores);

/// The optimization loop on a registry testbench (or the external evaluator).
RunTrace run(const RunConfig& config);

/// `budget` uniform evaluations. The first init_count points match run()'s
/// initialization for the same seed.
RunTrace random_search(const RunConfig& config);

/// One process per evaluation: {"x":[...]} on stdin, {"metrics":{...}} on stdout.
std::vector<double> evaluate_external(const std::string& command, const SpecSet& specs, std::span<const double> x,
                                      double timeout_seconds);

}  // namespace cpn

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpn/fom.hpp"
#include "cpn/optimizer.hpp"
#include "cpn/surrogate.hpp"

namespace cpn {

/// 1 - SS_res / SS_tot. Throws ContractError on empty or unequal inputs and
/// UndefinedVarianceError when every truth is the same.
double r_squared(std::span<const double> predictions, std::span<const double> truths);

struct RegressionTask {
  std::string testbench;
  /// Empty means every metric of the testbench.
  std::vector<std::string> metrics;
};

struct RegressionConfig {
  std::vector<RegressionTask> tasks;
  std::vector<BackendKind> backends = {BackendKind::gp_matern, BackendKind::khist};
  std::vector<std::size_t> sizes = {50, 100, 500};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double train_fraction = 0.8;
  std::size_t bins = kDefaultBins;
  std::string backend_command;
};

RegressionConfig regression_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RegressionConfig& config);

struct RegressionRow {
  std::string testbench;
  std::string metric;
  std::string backend;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// Empty when the backend failed to fit or predict.
  std::optional<double> r_squared;
};

/// For each (testbench, size, seed): one LHS dataset and one split shared by
/// every backend and metric. Predictions are posterior means.
std::vector<RegressionRow> run_regression_protocol(const RegressionConfig& config);

inline constexpr const char* kRegressionCsvHeader = "testbench,metric,backend,samples,seed,r_squared";
std::string regression_csv(std::span<const RegressionRow> rows);

struct ItrThreshold {
  enum class Mode { fraction_of_best, absolute };
  Mode mode = Mode::fraction_of_best;
  /// Fraction for fraction_of_best, the fom level for absolute.
  double value = 0.8;
};

/// First 1-based iteration whose incumbent fom reaches the threshold.
/// group_best is the best fom of the trace's comparison group (fraction mode).
std::optional<std::size_t> itr_at_threshold(const RunTrace& trace, const ItrThreshold& threshold,
                                            double group_best = 0.0);

/// "{n}" or "{budget}+" for not reached.
std::string render_itr(std::optional<std::size_t> itr, std::size_t budget);

/// best_b / best_a when maximizing, best_a / best_b when minimizing: values > 1
/// favor b. Throws ContractError on a zero denominator.
double improvement_factor(double best_a, double best_b, Direction direction);

/// The same, from the incumbent foms of two traces at a checkpoint (1-based
/// evaluation count). Throws ContractError when a trace is shorter.
double improvement_factor(const RunTrace& a, const RunTrace& b, std::size_t checkpoint);

/// Best objective score among feasible evaluated points, or the objective score
/// of the highest-fom point when none is feasible.
struct ConstrainedObjective {
  double value = 0.0;
  bool feasible = false;
};
ConstrainedObjective best_constrained_objective(const SpecSet& specs, const RunTrace& trace);

/// Loop invariants of one trace; empty when it passes.
std::vector<std::string> audit_trace(const RunTrace& trace);

struct MethodConfig {
  /// Random search ignores strategy, backend and acquisition.
  bool random_search = false;
  Strategy strategy = Strategy::direct_fom;
  BackendKind backend = BackendKind::khist;
  Acquisition acquisition = Acquisition::dei;
  std::string backend_command;

  std::string label() const;
};

struct AblationConfig {
  std::string dei_method;
  std::string ei_method;
  std::vector<std::size_t> checkpoints = {30, 50};
};

struct CampaignConfig {
  std::vector<MethodConfig> methods;
  std::vector<std::string> testbenches;
  std::vector<std::uint64_t> seeds;
  std::size_t budget = 400;
  std::size_t init_count = 5;
  std::size_t candidate_count = 2048;
  std::size_t bins = kDefaultBins;
  std::size_t fom_samples = 256;
  double timeout_seconds = 600.0;
  std::string external_eval_command;
  ItrThreshold itr_threshold;
  std::optional<AblationConfig> ablation;
  std::size_t workers = 1;

  /// Throws ConfigError on empty or inconsistent matrices.
  void validate() const;
  RunConfig run_config(const MethodConfig& method, const std::string& testbench, std::uint64_t seed) const;
};

/// "testbenches": "all" expands to the registry; "seed_count": n to seeds 0..n-1.
CampaignConfig campaign_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CampaignConfig& config);

struct CampaignRow {
  std::string method;
  std::string testbench;
  std::uint64_t seed = 0;
  double final_fom = 0.0;
  std::optional<std::size_t> itr;
  ConstrainedObjective objective;
  std::size_t evaluations = 0;
  std::size_t fallbacks = 0;
  std::string trace_file;
};

struct AblationRow {
  std::string testbench;
  std::uint64_t seed = 0;
  std::size_t checkpoint = 0;
  double dei_best = 0.0;
  double ei_best = 0.0;
  double factor = 0.0;
};

struct CampaignReport {
  std::vector<CampaignRow> rows;
  std::vector<AblationRow> ablation;
  /// Runs that threw, as "label: message".
  std::vector<std::string> errors;
};

inline constexpr const char* kAggregateCsvHeader =
    "method,testbench,seed,final_fom,itr_at_threshold,best_constrained_objective,feasible,evaluations,fallbacks";
inline constexpr const char* kSummaryCsvHeader =
    "method,testbench,runs,median_final_fom,median_itr_at_threshold,reached,median_best_constrained_objective,"
    "normalized_objective";
inline constexpr const char* kPlotCsvHeader = "method,testbench,seed,iteration,fom,incumbent_fom";
inline constexpr const char* kAblationCsvHeader = "testbench,seed,checkpoint,dei_best_fom,ei_best_fom,factor";
inline constexpr const char* kAblationSummaryCsvHeader = "testbench,checkpoint,seeds,median_factor";

std::string trace_file_name(const std::string& method, const std::string& testbench, std::uint64_t seed);

/// Runs the matrix, writes traces/, resolved_config.json and every report file
/// into out_dir. Failed runs are listed in errors.txt; the campaign continues.
CampaignReport run_campaign(const CampaignConfig& config, const std::filesystem::path& out_dir);

/// Rebuilds every report file from out_dir/traces and out_dir/resolved_config.json,
/// writing into report_dir.
CampaignReport report_from_traces(const std::filesystem::path& campaign_dir, const std::filesystem::path& report_dir);

/// Audits every trace in campaign_dir/traces; returns "file: violation" lines.
std::vector<std::string> audit_campaign(const std::filesystem::path& campaign_dir);

double median(std::vector<double> values);

}  // namespace cpn

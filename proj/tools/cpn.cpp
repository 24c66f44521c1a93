// cpn: testbench export, regression studies, optimizer runs and campaigns.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpn/error.hpp"
#include "cpn/harness.hpp"
#include "cpn/log.hpp"
#include "cpn/optimizer.hpp"
#include "cpn/sampling.hpp"
#include "cpn/testbench.hpp"

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cpn::ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw cpn::ConfigError(path + ": " + e.what());
  }
}

// "-" or empty writes to stdout
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cpn::ConfigError("cannot write " + path);
  out << content;
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string export_csv(const cpn::Testbench& tb, std::size_t samples, std::uint64_t seed) {
  cpn::Rng rng(seed);
  const auto points = cpn::latin_hypercube(tb.space, samples, rng);
  std::ostringstream out;
  for (std::size_t j = 0; j < tb.dim(); ++j) out << "x_" << j << ",";
  const auto names = tb.specs.names();
  for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << (i + 1 < names.size() ? "," : "\n");
  for (const auto& p : points) {
    for (double v : p.coords()) out << number(v) << ",";
    const auto m = cpn::evaluate_aligned(tb, p.coords());
    for (std::size_t i = 0; i < m.size(); ++i) out << number(m[i]) << (i + 1 < m.size() ? "," : "\n");
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-posterior Bayesian optimization on synthetic analog testbenches"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log info messages");

  auto* bench = app.add_subcommand("bench", "Inspect the testbench registry");
  bench->require_subcommand(1);
  auto* bench_list = bench->add_subcommand("list", "One line per testbench: name, dim, spec count");
  auto* bench_export = bench->add_subcommand("export", "LHS dataset as CSV");
  std::string export_name;
  std::size_t export_samples = 100;
  std::uint64_t export_seed = 0;
  std::string export_out;
  bench_export->add_option("--name", export_name, "Testbench name")->required();
  bench_export->add_option("--samples", export_samples, "Number of LHS samples")->capture_default_str();
  bench_export->add_option("--seed", export_seed, "Sampling seed")->capture_default_str();
  bench_export->add_option("--out", export_out, "Output CSV (default stdout)");
  auto* bench_manifest = bench->add_subcommand("manifest", "Names, bounds, specs and constants as JSON");
  std::string manifest_out;
  bench_manifest->add_option("--out", manifest_out, "Output JSON (default stdout)");

  auto* regress = app.add_subcommand("regress", "Small-sample regression protocol");
  regress->require_subcommand(1);
  auto* regress_run = regress->add_subcommand("run", "Run the protocol from a config file");
  std::string regress_config;
  std::string regress_out;
  std::vector<std::size_t> regress_sizes;
  std::size_t regress_seed_count = 0;
  regress_run->add_option("--config", regress_config, "Regression config JSON")->required();
  regress_run->add_option("--out", regress_out, "Output CSV (default stdout)");
  regress_run->add_option("--sizes", regress_sizes, "Override sample sizes");
  regress_run->add_option("--seed-count", regress_seed_count, "Override seeds with 0..n-1");

  auto* opt = app.add_subcommand("opt", "Single optimizer run");
  opt->require_subcommand(1);
  auto* opt_run = opt->add_subcommand("run", "Run the optimizer (or random search) and write the trace");
  cpn::RunConfig rc;
  std::string strategy = "direct_fom", backend = "khist", acq = "dei", opt_out;
  bool opt_random = false;
  opt_run->add_option("--bench", rc.testbench, "Testbench name")->required();
  opt_run->add_option("--strategy", strategy, "direct_fom | metric_decomposed | constraint_decomposed")
      ->capture_default_str();
  opt_run->add_option("--backend", backend, "gp_rbf | gp_matern | gp_linear | khist | external")
      ->capture_default_str();
  opt_run->add_option("--acq", acq, "dei | ei")->capture_default_str();
  opt_run->add_option("--budget", rc.budget, "Total evaluations")->capture_default_str();
  opt_run->add_option("--init", rc.init_count, "Initial random evaluations")->capture_default_str();
  opt_run->add_option("--candidates", rc.candidate_count, "Candidates per iteration")->capture_default_str();
  opt_run->add_option("--bins", rc.bins, "Posterior bins")->capture_default_str();
  opt_run->add_option("--fom-samples", rc.fom_samples, "Joint samples for metric_decomposed")->capture_default_str();
  opt_run->add_option("--seed", rc.seed, "Run seed")->capture_default_str();
  opt_run->add_option("--timeout", rc.timeout_seconds, "External process timeout in seconds")->capture_default_str();
  opt_run->add_option("--external-backend-cmd", rc.backend_command, "Command line of an external backend");
  opt_run->add_option("--external-eval-cmd", rc.external_eval_command, "Command line of an external evaluator");
  opt_run->add_flag("--random", opt_random, "Random search baseline instead of the optimizer");
  opt_run->add_option("--out", opt_out, "Output trace JSON (default stdout)");

  auto* campaign = app.add_subcommand("campaign", "Run matrices of optimizer runs");
  campaign->require_subcommand(1);
  auto* campaign_run = campaign->add_subcommand("run", "Run a campaign config");
  std::string campaign_config, campaign_out = "results/campaign";
  std::size_t campaign_workers = 0, campaign_budget = 0, campaign_seed_count = 0;
  campaign_run->add_option("--config", campaign_config, "Campaign config JSON")->required();
  campaign_run->add_option("--out", campaign_out, "Output directory")->capture_default_str();
  campaign_run->add_option("--workers", campaign_workers, "Parallel runs");
  campaign_run->add_option("--budget", campaign_budget, "Override the budget");
  campaign_run->add_option("--seed-count", campaign_seed_count, "Override seeds with 0..n-1");
  auto* campaign_audit = campaign->add_subcommand("audit", "Check loop invariants on every trace");
  std::string audit_dir;
  campaign_audit->add_option("--from", audit_dir, "Campaign directory")->required();

  auto* report = app.add_subcommand("report", "Regenerate report tables from campaign traces");
  std::string report_from, report_out;
  report->add_option("--from", report_from, "Campaign directory")->required();
  report->add_option("--out", report_out, "Output directory (default: the campaign directory)");

  CLI11_PARSE(app, argc, argv);
  if (verbose) cpn::log::set_level(cpn::log::Level::info);

  try {
    if (bench_list->parsed()) {
      for (const auto& [name, tb] : cpn::registry()) {
        std::cout << name << " " << tb.dim() << " " << tb.specs.size() << "\n";
      }
    } else if (bench_export->parsed()) {
      emit(export_out, export_csv(cpn::find_testbench(export_name), export_samples, export_seed));
    } else if (bench_manifest->parsed()) {
      emit(manifest_out, cpn::registry_manifest().dump(2) + "\n");
    } else if (regress_run->parsed()) {
      auto config = cpn::regression_config_from_json(read_json_file(regress_config));
      if (!regress_sizes.empty()) config.sizes = regress_sizes;
      if (regress_seed_count > 0) {
        config.seeds.clear();
        for (std::uint64_t s = 0; s < regress_seed_count; ++s) config.seeds.push_back(s);
      }
      const auto rows = cpn::run_regression_protocol(config);
      emit(regress_out, cpn::regression_csv(rows));
    } else if (opt_run->parsed()) {
      rc.strategy = cpn::parse_strategy(strategy);
      rc.backend = cpn::parse_backend_kind(backend);
      rc.acquisition = cpn::parse_acquisition(acq);
      const auto trace = opt_random ? cpn::random_search(rc) : cpn::run(rc);
      emit(opt_out, cpn::to_json(trace).dump() + "\n");
      const auto& best = trace.records[trace.best_index()];
      std::cerr << trace.method << " on " << rc.testbench << ": best fom " << best.fom << " at evaluation "
                << best.iteration << "\n";
    } else if (campaign_run->parsed()) {
      auto config = cpn::campaign_config_from_json(read_json_file(campaign_config));
      if (campaign_workers > 0) config.workers = campaign_workers;
      if (campaign_budget > 0) config.budget = campaign_budget;
      if (campaign_seed_count > 0) {
        config.seeds.clear();
        for (std::uint64_t s = 0; s < campaign_seed_count; ++s) config.seeds.push_back(s);
      }
      const auto result = cpn::run_campaign(config, campaign_out);
      std::cerr << result.rows.size() << " runs, " << result.errors.size() << " failed; results in " << campaign_out
                << "\n";
      return result.errors.empty() ? 0 : 1;
    } else if (campaign_audit->parsed()) {
      const auto violations = cpn::audit_campaign(audit_dir);
      for (const auto& v : violations) std::cout << v << "\n";
      std::cerr << (violations.empty() ? "all traces pass" : std::to_string(violations.size()) + " violations")
                << "\n";
      return violations.empty() ? 0 : 1;
    } else if (report->parsed()) {
      const auto result = cpn::report_from_traces(report_from, report_out.empty() ? report_from : report_out);
      for (const auto& e : result.errors) std::cerr << e << "\n";
      return result.errors.empty() ? 0 : 1;
    }
  } catch (const cpn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

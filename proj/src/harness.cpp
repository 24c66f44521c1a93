#include "cpn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "cpn/error.hpp"
#include "cpn/external_backend.hpp"
#include "cpn/log.hpp"
#include "cpn/sampling.hpp"
#include "cpn/testbench.hpp"

namespace cpn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a temporary sibling, then rename, so readers never see half a file.
void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

json load_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

template <typename T>
std::vector<T> list_or_single(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw ContractError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double r_squared(std::span<const double> predictions, std::span<const double> truths) {
  if (truths.empty() || predictions.size() != truths.size()) {
    throw ContractError("r_squared: need equal, nonempty prediction and truth vectors");
  }
  double mean = 0.0;
  for (double t : truths) mean += t;
  mean /= static_cast<double>(truths.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    ss_res += (predictions[i] - truths[i]) * (predictions[i] - truths[i]);
    ss_tot += (truths[i] - mean) * (truths[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw UndefinedVarianceError("r_squared: truths have zero variance");
  return 1.0 - ss_res / ss_tot;
}

RegressionConfig regression_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("regression config must be a JSON object");
  RegressionConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "tasks") {
        c.tasks.clear();
        for (const auto& t : value) {
          RegressionTask task;
          if (t.is_string()) {
            task.testbench = t.get<std::string>();
          } else {
            task.testbench = t.at("testbench").get<std::string>();
            if (t.contains("metrics")) task.metrics = list_or_single<std::string>(t["metrics"]);
          }
          c.tasks.push_back(std::move(task));
        }
      } else if (key == "backends") {
        c.backends.clear();
        for (const auto& b : list_or_single<std::string>(value)) c.backends.push_back(parse_backend_kind(b));
      } else if (key == "sizes") {
        c.sizes = list_or_single<std::size_t>(value);
      } else if (key == "seeds") {
        c.seeds = list_or_single<std::uint64_t>(value);
      } else if (key == "seed_count") {
        c.seeds.clear();
        for (std::uint64_t s = 0; s < value.get<std::uint64_t>(); ++s) c.seeds.push_back(s);
      } else if (key == "train_fraction") {
        c.train_fraction = value.get<double>();
      } else if (key == "bins") {
        c.bins = value.get<std::size_t>();
      } else if (key == "backend_command") {
        c.backend_command = value.get<std::string>();
      } else {
        throw ConfigError("unknown regression config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("regression config: ") + e.what());
  }
  if (c.tasks.empty()) throw ConfigError("regression config needs at least one task");
  for (const auto& t : c.tasks) {
    const auto& tb = find_testbench(t.testbench);
    for (const auto& m : t.metrics) tb.specs.index_of(m);
  }
  if (c.backends.empty() || c.sizes.empty() || c.seeds.empty()) {
    throw ConfigError("regression config needs backends, sizes and seeds");
  }
  return c;
}

json to_json(const RegressionConfig& c) {
  json tasks = json::array();
  for (const auto& t : c.tasks) tasks.push_back({{"testbench", t.testbench}, {"metrics", t.metrics}});
  json backends = json::array();
  for (auto b : c.backends) backends.push_back(to_string(b));
  return json{{"tasks", tasks},       {"backends", backends}, {"sizes", c.sizes},
              {"seeds", c.seeds},     {"train_fraction", c.train_fraction},
              {"bins", c.bins},       {"backend_command", c.backend_command}};
}

std::vector<RegressionRow> run_regression_protocol(const RegressionConfig& config) {
  std::shared_ptr<ExternalConnection> connection;
  auto backend_for = [&](BackendKind kind, std::uint64_t seed) -> std::unique_ptr<SurrogateBackend> {
    if (kind != BackendKind::external) return make_backend({kind, config.bins, seed, {}});
    if (config.backend_command.empty()) throw ConfigError("backend 'external' needs backend_command");
    if (!connection) connection = std::make_shared<ExternalConnection>(config.backend_command);
    return std::make_unique<ExternalBackend>(connection, config.bins);
  };

  std::vector<RegressionRow> rows;
  for (const auto& task : config.tasks) {
    const Testbench& tb = find_testbench(task.testbench);
    const auto names = task.metrics.empty() ? tb.specs.names() : task.metrics;
    for (std::size_t size : config.sizes) {
      for (std::uint64_t seed : config.seeds) {
        Rng rng(seed);
        const auto points = latin_hypercube(tb.space, size, rng);
        std::vector<std::vector<double>> unit;
        std::vector<std::vector<double>> values;
        for (const auto& p : points) {
          unit.push_back(tb.space.to_unit(p.coords()));
          values.push_back(evaluate_aligned(tb, p.coords()));
        }
        const SplitIndices split = train_test_split(size, config.train_fraction, rng);
        std::vector<Query> test_x;
        for (std::size_t i : split.test) test_x.push_back(unit[i]);

        for (const auto& metric : names) {
          const std::size_t m = tb.specs.index_of(metric);
          Dataset train;
          for (std::size_t i : split.train) {
            train.x.push_back(unit[i]);
            train.y.push_back(values[i][m]);
          }
          std::vector<double> truths;
          for (std::size_t i : split.test) truths.push_back(values[i][m]);

          for (BackendKind kind : config.backends) {
            RegressionRow row{task.testbench, metric, to_string(kind), size, seed, std::nullopt};
            try {
              auto backend = backend_for(kind, seed);
              backend->set_context(train);
              const auto posts = backend->predict_batch(test_x);
              std::vector<double> preds;
              for (const auto& p : posts) preds.push_back(moments(p).mean);
              row.r_squared = r_squared(preds, truths);
            } catch (const Error& e) {
              log::warn("regression " + task.testbench + "/" + metric + "/" + to_string(kind) + " n=" +
                        std::to_string(size) + " seed=" + std::to_string(seed) + " failed: " + e.what());
            }
            rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return rows;
}

std::string regression_csv(std::span<const RegressionRow> rows) {
  std::string out = std::string(kRegressionCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.testbench + "," + r.metric + "," + r.backend + "," + std::to_string(r.samples) + "," +
           std::to_string(r.seed) + "," + (r.r_squared ? fmt(*r.r_squared) : "failed") + "\n";
  }
  return out;
}

std::optional<std::size_t> itr_at_threshold(const RunTrace& trace, const ItrThreshold& threshold, double group_best) {
  if (trace.records.empty()) throw ContractError("itr_at_threshold: empty trace");
  const double level =
      threshold.mode == ItrThreshold::Mode::absolute ? threshold.value : threshold.value * group_best;
  for (const auto& r : trace.records) {
    if (r.incumbent_fom >= level) return r.iteration;
  }
  return std::nullopt;
}

std::string render_itr(std::optional<std::size_t> itr, std::size_t budget) {
  return itr ? std::to_string(*itr) : std::to_string(budget) + "+";
}

double improvement_factor(double best_a, double best_b, Direction direction) {
  const double num = direction == Direction::maximize ? best_b : best_a;
  const double den = direction == Direction::maximize ? best_a : best_b;
  if (den == 0.0) throw ContractError("improvement_factor: zero denominator");
  return num / den;
}

double improvement_factor(const RunTrace& a, const RunTrace& b, std::size_t checkpoint) {
  if (checkpoint < 1 || a.records.size() < checkpoint || b.records.size() < checkpoint) {
    throw ContractError("improvement_factor: both traces must reach evaluation " + std::to_string(checkpoint));
  }
  return improvement_factor(a.records[checkpoint - 1].incumbent_fom, b.records[checkpoint - 1].incumbent_fom,
                            Direction::maximize);
}

ConstrainedObjective best_constrained_objective(const SpecSet& specs, const RunTrace& trace) {
  ConstrainedObjective best;
  for (const auto& r : trace.records) {
    if (!all_hard_met(specs, r.metrics)) continue;
    const double s = objective_score(specs, r.metrics);
    if (!best.feasible || s > best.value) best = {s, true};
  }
  if (!best.feasible) best.value = objective_score(specs, trace.records.at(trace.best_index()).metrics);
  return best;
}

std::vector<std::string> audit_trace(const RunTrace& trace) {
  std::vector<std::string> out;
  auto fail = [&](const std::string& what) { out.push_back(what); };
  const auto& c = trace.config;
  if (trace.records.size() != c.budget) {
    fail("evaluation count " + std::to_string(trace.records.size()) + " != budget " + std::to_string(c.budget));
  }
  const bool random = trace.method == "random_search";
  const SpecSet& specs = find_testbench(c.testbench).specs;
  const std::size_t instances = random ? 0 : surrogate_instance_count(c.strategy, specs);
  if (trace.surrogate_instances != instances) fail("surrogate instance count does not match the strategy");

  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    const std::string at = "iteration " + std::to_string(i + 1) + ": ";
    if (r.iteration != i + 1) fail(at + "iteration index out of sequence");
    if (r.context_size != i + 1) fail(at + "context size " + std::to_string(r.context_size) + " != init + t");
    if (r.metrics.size() != trace.metric_names.size()) fail(at + "metric count mismatch");
    if (i > 0 && r.incumbent_fom < trace.records[i - 1].incumbent_fom) fail(at + "incumbent decreased");
    running = std::max(running, r.fom);
    if (r.incumbent_fom != running) fail(at + "incumbent is not the running best fom");
    const std::size_t expected = c.candidate_count * instances;
    switch (r.phase) {
      case Phase::init:
        if (random || i >= c.init_count) fail(at + "init phase outside initialization");
        if (r.surrogate_queries != 0) fail(at + "surrogate queried during initialization");
        break;
      case Phase::random:
        if (!random) fail(at + "random phase in an optimizer trace");
        if (r.surrogate_queries != 0) fail(at + "random search issued surrogate queries");
        break;
      case Phase::acquisition:
        if (random || i < c.init_count) fail(at + "acquisition phase during initialization");
        if (r.surrogate_queries != expected) {
          fail(at + "surrogate queries " + std::to_string(r.surrogate_queries) + " != " + std::to_string(expected));
        }
        break;
      case Phase::fallback:
        if (random || i < c.init_count) fail(at + "fallback phase during initialization");
        if (r.surrogate_queries > expected) fail(at + "fallback issued more queries than an acquisition");
        break;
    }
  }
  return out;
}

std::string MethodConfig::label() const {
  if (random_search) return "random_search";
  return to_string(strategy) + "+" + to_string(backend) + "+" + to_string(acquisition);
}

void CampaignConfig::validate() const {
  if (methods.empty()) throw ConfigError("campaign needs at least one method");
  if (testbenches.empty()) throw ConfigError("campaign needs at least one testbench");
  if (seeds.empty()) throw ConfigError("campaign needs at least one seed");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  std::set<std::string> labels;
  for (const auto& m : methods) {
    if (!labels.insert(m.label()).second) throw ConfigError("duplicate method '" + m.label() + "'");
  }
  for (const auto& tb : testbenches) find_testbench(tb);
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("duplicate seeds");
  }
  for (const auto& m : methods) run_config(m, testbenches.front(), seeds.front()).validate();
  if (ablation) {
    if (!labels.count(ablation->dei_method) || !labels.count(ablation->ei_method)) {
      throw ConfigError("ablation methods must be listed under methods");
    }
    for (std::size_t cp : ablation->checkpoints) {
      if (cp < 1 || cp > budget) throw ConfigError("ablation checkpoint outside 1..budget");
    }
  }
}

RunConfig CampaignConfig::run_config(const MethodConfig& method, const std::string& testbench,
                                     std::uint64_t seed) const {
  RunConfig rc;
  rc.testbench = testbench;
  rc.strategy = method.strategy;
  rc.backend = method.backend;
  rc.backend_command = method.backend_command;
  rc.acquisition = method.acquisition;
  rc.budget = budget;
  rc.init_count = init_count;
  rc.candidate_count = candidate_count;
  rc.bins = bins;
  rc.fom_samples = fom_samples;
  rc.seed = seed;
  rc.external_eval_command = external_eval_command;
  rc.timeout_seconds = timeout_seconds;
  return rc;
}

namespace {

MethodConfig method_from_json(const json& j) {
  MethodConfig m;
  if (j.is_string()) {
    // "random_search" or "strategy+backend+acq"
    const auto text = j.get<std::string>();
    if (text == "random_search") {
      m.random_search = true;
      return m;
    }
    const auto a = text.find('+');
    const auto b = text.find('+', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) throw ConfigError("bad method label '" + text + "'");
    m.strategy = parse_strategy(text.substr(0, a));
    m.backend = parse_backend_kind(text.substr(a + 1, b - a - 1));
    m.acquisition = parse_acquisition(text.substr(b + 1));
    return m;
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "method") {
      if (value.get<std::string>() != "random_search") throw ConfigError("method must be 'random_search'");
      m.random_search = true;
    } else if (key == "strategy") {
      m.strategy = parse_strategy(value.get<std::string>());
    } else if (key == "backend") {
      m.backend = parse_backend_kind(value.get<std::string>());
    } else if (key == "acq") {
      m.acquisition = parse_acquisition(value.get<std::string>());
    } else if (key == "backend_command") {
      m.backend_command = value.get<std::string>();
    } else {
      throw ConfigError("unknown method key '" + key + "'");
    }
  }
  return m;
}

json method_to_json(const MethodConfig& m) {
  if (m.random_search) return json{{"method", "random_search"}};
  json out{{"strategy", to_string(m.strategy)}, {"backend", to_string(m.backend)}, {"acq", to_string(m.acquisition)}};
  if (!m.backend_command.empty()) out["backend_command"] = m.backend_command;
  return out;
}

}  // namespace

CampaignConfig campaign_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("campaign config must be a JSON object");
  CampaignConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "methods") {
        for (const auto& m : value) c.methods.push_back(method_from_json(m));
      } else if (key == "testbenches") {
        if (value.is_string() && value.get<std::string>() == "all") {
          for (const auto& [name, tb] : registry()) c.testbenches.push_back(name);
        } else {
          c.testbenches = list_or_single<std::string>(value);
        }
      } else if (key == "seeds") {
        c.seeds = list_or_single<std::uint64_t>(value);
      } else if (key == "seed_count") {
        c.seeds.clear();
        for (std::uint64_t s = 0; s < value.get<std::uint64_t>(); ++s) c.seeds.push_back(s);
      } else if (key == "budget") {
        c.budget = value.get<std::size_t>();
      } else if (key == "init_count") {
        c.init_count = value.get<std::size_t>();
      } else if (key == "candidate_count") {
        c.candidate_count = value.get<std::size_t>();
      } else if (key == "bins") {
        c.bins = value.get<std::size_t>();
      } else if (key == "fom_samples") {
        c.fom_samples = value.get<std::size_t>();
      } else if (key == "timeout_s") {
        c.timeout_seconds = value.get<double>();
      } else if (key == "external_eval_cmd") {
        c.external_eval_command = value.get<std::string>();
      } else if (key == "workers") {
        c.workers = value.get<std::size_t>();
      } else if (key == "itr_threshold") {
        const auto mode = value.value("mode", std::string("fraction_of_best"));
        if (mode == "fraction_of_best") c.itr_threshold.mode = ItrThreshold::Mode::fraction_of_best;
        else if (mode == "absolute") c.itr_threshold.mode = ItrThreshold::Mode::absolute;
        else throw ConfigError("itr_threshold.mode must be fraction_of_best or absolute");
        c.itr_threshold.value = value.value("value", 0.8);
      } else if (key == "ablation") {
        AblationConfig a;
        a.dei_method = value.at("dei").get<std::string>();
        a.ei_method = value.at("ei").get<std::string>();
        if (value.contains("checkpoints")) a.checkpoints = value["checkpoints"].get<std::vector<std::size_t>>();
        c.ablation = a;
      } else {
        throw ConfigError("unknown campaign config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("campaign config: ") + e.what());
  }
  return c;
}

json to_json(const CampaignConfig& c) {
  json methods = json::array();
  for (const auto& m : c.methods) methods.push_back(method_to_json(m));
  json out{{"methods", methods},
           {"testbenches", c.testbenches},
           {"seeds", c.seeds},
           {"budget", c.budget},
           {"init_count", c.init_count},
           {"candidate_count", c.candidate_count},
           {"bins", c.bins},
           {"fom_samples", c.fom_samples},
           {"timeout_s", c.timeout_seconds},
           {"external_eval_cmd", c.external_eval_command},
           {"workers", c.workers},
           {"itr_threshold",
            {{"mode", c.itr_threshold.mode == ItrThreshold::Mode::absolute ? "absolute" : "fraction_of_best"},
             {"value", c.itr_threshold.value}}}};
  if (c.ablation) {
    out["ablation"] = {{"dei", c.ablation->dei_method},
                       {"ei", c.ablation->ei_method},
                       {"checkpoints", c.ablation->checkpoints}};
  }
  return out;
}

std::string trace_file_name(const std::string& method, const std::string& testbench, std::uint64_t seed) {
  return method + "__" + testbench + "__seed" + std::to_string(seed) + ".json";
}

namespace {

struct Cell {
  const MethodConfig* method;
  std::string testbench;
  std::uint64_t seed;
};

std::vector<Cell> cells_of(const CampaignConfig& c) {
  std::vector<Cell> out;
  for (const auto& m : c.methods) {
    for (const auto& tb : c.testbenches) {
      for (auto s : c.seeds) out.push_back({&m, tb, s});
    }
  }
  return out;
}

void write_reports(const CampaignConfig& config, const CampaignReport& report,
                   const std::map<std::string, RunTrace>& traces, const fs::path& dir) {
  std::string aggregate = std::string(kAggregateCsvHeader) + "\n";
  for (const auto& r : report.rows) {
    aggregate += r.method + "," + r.testbench + "," + std::to_string(r.seed) + "," + fmt(r.final_fom) + "," +
                 render_itr(r.itr, config.budget) + "," + fmt(r.objective.value) + "," +
                 (r.objective.feasible ? "1" : "0") + "," + std::to_string(r.evaluations) + "," +
                 std::to_string(r.fallbacks) + "\n";
  }
  write_file_atomic(dir / "aggregate.csv", aggregate);

  // medians per (method, testbench), then min-max normalization of the
  // objective medians across methods within a testbench
  struct Summary {
    std::string method, testbench;
    std::size_t runs = 0, reached = 0;
    double fom = 0.0, itr = 0.0, objective = 0.0;
  };
  std::vector<Summary> summaries;
  for (const auto& m : config.methods) {
    for (const auto& tb : config.testbenches) {
      std::vector<double> foms, itrs, objectives;
      Summary s{m.label(), tb};
      for (const auto& r : report.rows) {
        if (r.method != s.method || r.testbench != tb) continue;
        foms.push_back(r.final_fom);
        itrs.push_back(r.itr ? static_cast<double>(*r.itr) : static_cast<double>(config.budget + 1));
        objectives.push_back(r.objective.value);
        s.reached += r.itr.has_value();
      }
      s.runs = foms.size();
      if (s.runs == 0) continue;
      s.fom = median(foms);
      s.itr = median(itrs);
      s.objective = median(objectives);
      summaries.push_back(s);
    }
  }
  std::string summary = std::string(kSummaryCsvHeader) + "\n";
  for (const auto& s : summaries) {
    double lo = s.objective, hi = s.objective;
    for (const auto& o : summaries) {
      if (o.testbench != s.testbench) continue;
      lo = std::min(lo, o.objective);
      hi = std::max(hi, o.objective);
    }
    const double normalized = hi > lo ? (s.objective - lo) / (hi - lo) : 1.0;
    const std::string itr = s.itr > static_cast<double>(config.budget) ? std::to_string(config.budget) + "+" : fmt(s.itr);
    summary += s.method + "," + s.testbench + "," + std::to_string(s.runs) + "," + fmt(s.fom) + "," + itr + "," +
               std::to_string(s.reached) + "," + fmt(s.objective) + "," + fmt(normalized) + "\n";
  }
  write_file_atomic(dir / "summary.csv", summary);

  std::string plot = std::string(kPlotCsvHeader) + "\n";
  for (const auto& r : report.rows) {
    const auto& trace = traces.at(r.trace_file);
    for (const auto& rec : trace.records) {
      plot += r.method + "," + r.testbench + "," + std::to_string(r.seed) + "," + std::to_string(rec.iteration) + "," +
              fmt(rec.fom) + "," + fmt(rec.incumbent_fom) + "\n";
    }
  }
  write_file_atomic(dir / "plot_data.csv", plot);

  if (config.ablation) {
    std::string rows = std::string(kAblationCsvHeader) + "\n";
    for (const auto& a : report.ablation) {
      rows += a.testbench + "," + std::to_string(a.seed) + "," + std::to_string(a.checkpoint) + "," +
              fmt(a.dei_best) + "," + fmt(a.ei_best) + "," + fmt(a.factor) + "\n";
    }
    write_file_atomic(dir / "ablation.csv", rows);
    std::string sum = std::string(kAblationSummaryCsvHeader) + "\n";
    for (const auto& tb : config.testbenches) {
      for (std::size_t cp : config.ablation->checkpoints) {
        std::vector<double> factors;
        for (const auto& a : report.ablation) {
          if (a.testbench == tb && a.checkpoint == cp) factors.push_back(a.factor);
        }
        if (factors.empty()) continue;
        sum += tb + "," + std::to_string(cp) + "," + std::to_string(factors.size()) + "," + fmt(median(factors)) + "\n";
      }
    }
    write_file_atomic(dir / "ablation_summary.csv", sum);
  }
}

CampaignReport build_report(const CampaignConfig& config, const std::map<std::string, RunTrace>& traces,
                            std::vector<std::string> errors) {
  CampaignReport report;
  report.errors = std::move(errors);
  std::map<std::string, double> group_best;
  for (const auto& cell : cells_of(config)) {
    auto it = traces.find(trace_file_name(cell.method->label(), cell.testbench, cell.seed));
    if (it == traces.end()) continue;
    auto& best = group_best.try_emplace(cell.testbench, -std::numeric_limits<double>::infinity()).first->second;
    best = std::max(best, it->second.final_fom());
  }
  for (const auto& cell : cells_of(config)) {
    const std::string file = trace_file_name(cell.method->label(), cell.testbench, cell.seed);
    auto it = traces.find(file);
    if (it == traces.end()) continue;
    const RunTrace& t = it->second;
    CampaignRow row;
    row.method = cell.method->label();
    row.testbench = cell.testbench;
    row.seed = cell.seed;
    row.final_fom = t.final_fom();
    row.itr = itr_at_threshold(t, config.itr_threshold, group_best.at(cell.testbench));
    row.objective = best_constrained_objective(find_testbench(cell.testbench).specs, t);
    row.evaluations = t.records.size();
    row.fallbacks = static_cast<std::size_t>(
        std::count_if(t.records.begin(), t.records.end(), [](const auto& r) { return r.phase == Phase::fallback; }));
    row.trace_file = file;
    report.rows.push_back(std::move(row));
  }
  if (config.ablation) {
    for (const auto& tb : config.testbenches) {
      for (auto seed : config.seeds) {
        auto d = traces.find(trace_file_name(config.ablation->dei_method, tb, seed));
        auto e = traces.find(trace_file_name(config.ablation->ei_method, tb, seed));
        if (d == traces.end() || e == traces.end()) continue;
        for (std::size_t cp : config.ablation->checkpoints) {
          AblationRow a{tb, seed, cp, d->second.records.at(cp - 1).incumbent_fom,
                        e->second.records.at(cp - 1).incumbent_fom, 0.0};
          a.factor = improvement_factor(e->second, d->second, cp);
          report.ablation.push_back(a);
        }
      }
    }
  }
  return report;
}

std::map<std::string, RunTrace> load_traces(const CampaignConfig& config, const fs::path& dir,
                                            std::vector<std::string>& missing) {
  std::map<std::string, RunTrace> traces;
  for (const auto& cell : cells_of(config)) {
    const std::string file = trace_file_name(cell.method->label(), cell.testbench, cell.seed);
    const fs::path path = dir / "traces" / file;
    if (!fs::exists(path)) {
      missing.push_back(file + ": no trace");
      continue;
    }
    traces.emplace(file, trace_from_json(load_json(path)));
  }
  return traces;
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& config, const fs::path& out_dir) {
  config.validate();
  fs::create_directories(out_dir / "traces");
  write_file_atomic(out_dir / "resolved_config.json", to_json(config).dump(2) + "\n");

  const auto cells = cells_of(config);
  std::vector<std::string> failures(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      const std::string file = trace_file_name(cell.method->label(), cell.testbench, cell.seed);
      try {
        const RunConfig rc = config.run_config(*cell.method, cell.testbench, cell.seed);
        RunTrace trace = cell.method->random_search ? random_search(rc) : run(rc);
        write_file_atomic(out_dir / "traces" / file, to_json(trace).dump() + "\n");
      } catch (const std::exception& e) {
        failures[i] = file + ": " + e.what();
        log::error("campaign run failed: " + failures[i]);
      }
    }
  };
  const std::size_t n_workers = std::min(config.workers, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string errors_txt;
  std::vector<std::string> errors;
  for (auto& f : failures) {
    if (f.empty()) continue;
    errors_txt += f + "\n";
    errors.push_back(f);
  }
  write_file_atomic(out_dir / "errors.txt", errors_txt);

  // reports are always rebuilt from the persisted traces
  std::vector<std::string> missing;
  const auto traces = load_traces(config, out_dir, missing);
  CampaignReport report = build_report(config, traces, errors);
  write_reports(config, report, traces, out_dir);
  return report;
}

CampaignReport report_from_traces(const fs::path& campaign_dir, const fs::path& report_dir) {
  const CampaignConfig config = campaign_config_from_json(load_json(campaign_dir / "resolved_config.json"));
  config.validate();
  std::vector<std::string> missing;
  const auto traces = load_traces(config, campaign_dir, missing);
  fs::create_directories(report_dir);
  CampaignReport report = build_report(config, traces, missing);
  write_reports(config, report, traces, report_dir);
  return report;
}

std::vector<std::string> audit_campaign(const fs::path& campaign_dir) {
  std::vector<std::string> out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(campaign_dir / "traces")) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    try {
      for (const auto& v : audit_trace(trace_from_json(load_json(path)))) {
        out.push_back(path.filename().string() + ": " + v);
      }
    } catch (const Error& e) {
      out.push_back(path.filename().string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cpn

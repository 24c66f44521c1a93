#include "cpn/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "cpn/error.hpp"
#include "cpn/external_backend.hpp"
#include "cpn/log.hpp"
#include "cpn/subprocess.hpp"

namespace cpn {

using nlohmann::json;

namespace {

// Rng stream ids, forked off the run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kCandidateStreamBase = 1'000'000;
constexpr std::uint64_t kFallbackStreamBase = 2'000'000;

// exp() argument cap for log-scale metric samples
constexpr double kMaxLogMetric = 700.0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> uniform_unit_point(std::size_t dim, Rng& rng) {
  std::vector<double> u(dim);
  for (double& v : u) v = rng.uniform01();
  return u;
}

}  // namespace

Strategy parse_strategy(const std::string& text) {
  if (text == "direct_fom") return Strategy::direct_fom;
  if (text == "metric_decomposed") return Strategy::metric_decomposed;
  if (text == "constraint_decomposed") return Strategy::constraint_decomposed;
  throw ConfigError("unknown strategy '" + text + "' (direct_fom, metric_decomposed, constraint_decomposed)");
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::direct_fom: return "direct_fom";
    case Strategy::metric_decomposed: return "metric_decomposed";
    case Strategy::constraint_decomposed: return "constraint_decomposed";
  }
  return "unknown";
}

Acquisition parse_acquisition(const std::string& text) {
  if (text == "ei") return Acquisition::ei;
  if (text == "dei") return Acquisition::dei;
  throw ConfigError("unknown acquisition '" + text + "' (ei, dei)");
}

std::string to_string(Acquisition acquisition) { return acquisition == Acquisition::ei ? "ei" : "dei"; }

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::init: return "init";
    case Phase::acquisition: return "acquisition";
    case Phase::fallback: return "fallback";
    case Phase::random: return "random";
  }
  return "unknown";
}

Phase parse_phase(const std::string& text) {
  if (text == "init") return Phase::init;
  if (text == "acquisition") return Phase::acquisition;
  if (text == "fallback") return Phase::fallback;
  if (text == "random") return Phase::random;
  throw ConfigError("unknown phase '" + text + "'");
}

void RunConfig::validate() const {
  if (init_count < 1) throw ConfigError("init_count must be at least 1");
  if (budget < init_count) throw ConfigError("budget must be at least init_count");
  if (candidate_count < 1) throw ConfigError("candidate_count must be at least 1");
  if (bins < 1) throw ConfigError("bins must be at least 1");
  if (fom_samples < 1) throw ConfigError("fom_samples must be at least 1");
  if (!(timeout_seconds > 0.0)) throw ConfigError("timeout must be positive");
  if (backend == BackendKind::external && backend_command.empty()) {
    throw ConfigError("backend 'external' needs a backend command");
  }
  if (strategy == Strategy::metric_decomposed && acquisition == Acquisition::ei) {
    throw ConfigError("acquisition 'ei' is not defined for metric_decomposed (use dei)");
  }
}

json to_json(const RunConfig& c) {
  return json{{"testbench", c.testbench},
              {"strategy", to_string(c.strategy)},
              {"backend", to_string(c.backend)},
              {"backend_command", c.backend_command},
              {"acq", to_string(c.acquisition)},
              {"budget", c.budget},
              {"init_count", c.init_count},
              {"candidate_count", c.candidate_count},
              {"bins", c.bins},
              {"fom_samples", c.fom_samples},
              {"seed", c.seed},
              {"external_eval_cmd", c.external_eval_command},
              {"timeout_s", c.timeout_seconds}};
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "testbench") c.testbench = value.get<std::string>();
      else if (key == "strategy") c.strategy = parse_strategy(value.get<std::string>());
      else if (key == "backend") c.backend = parse_backend_kind(value.get<std::string>());
      else if (key == "backend_command") c.backend_command = value.get<std::string>();
      else if (key == "acq") c.acquisition = parse_acquisition(value.get<std::string>());
      else if (key == "budget") c.budget = value.get<std::size_t>();
      else if (key == "init_count") c.init_count = value.get<std::size_t>();
      else if (key == "candidate_count") c.candidate_count = value.get<std::size_t>();
      else if (key == "bins") c.bins = value.get<std::size_t>();
      else if (key == "fom_samples") c.fom_samples = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "external_eval_cmd") c.external_eval_command = value.get<std::string>();
      else if (key == "timeout_s") c.timeout_seconds = value.get<double>();
      else throw ConfigError("unknown run config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return c;
}

std::string method_label(const RunConfig& c) {
  return to_string(c.strategy) + "+" + to_string(c.backend) + "+" + to_string(c.acquisition);
}

std::size_t RunTrace::best_index() const {
  if (records.empty()) throw ContractError("empty trace has no best point");
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].fom > records[best].fom) best = i;
  }
  return best;
}

json to_json(const RunTrace& t) {
  json records = json::array();
  for (const auto& r : t.records) {
    json rec{{"iteration", r.iteration},
             {"phase", to_string(r.phase)},
             {"x", r.x},
             {"metrics", r.metrics},
             {"fom", r.fom},
             {"incumbent_fom", r.incumbent_fom},
             {"acquisition_value", r.acquisition_value ? json(*r.acquisition_value) : json(nullptr)},
             {"surrogate_queries", r.surrogate_queries},
             {"context_size", r.context_size},
             {"timings",
              {{"surrogate_s", r.timings.surrogate_seconds},
               {"acquisition_s", r.timings.acquisition_seconds},
               {"evaluation_s", r.timings.evaluation_seconds}}}};
    if (!r.fallback_reason.empty()) rec["fallback_reason"] = r.fallback_reason;
    records.push_back(std::move(rec));
  }
  const std::size_t best = t.best_index();
  return json{{"schema_version", RunTrace::kSchemaVersion},
              {"method", t.method},
              {"config", to_json(t.config)},
              {"metric_names", t.metric_names},
              {"surrogate_instances", t.surrogate_instances},
              {"best", {{"iteration", t.records[best].iteration}, {"fom", t.records[best].fom}, {"x", t.records[best].x}}},
              {"records", records}};
}

RunTrace trace_from_json(const json& j) {
  RunTrace t;
  try {
    if (j.at("schema_version").get<int>() != RunTrace::kSchemaVersion) {
      throw ConfigError("unsupported trace schema version " + j.at("schema_version").dump());
    }
    t.method = j.at("method").get<std::string>();
    t.config = run_config_from_json(j.at("config"));
    t.metric_names = j.at("metric_names").get<std::vector<std::string>>();
    t.surrogate_instances = j.at("surrogate_instances").get<std::size_t>();
    for (const auto& rec : j.at("records")) {
      IterationRecord r;
      r.iteration = rec.at("iteration").get<std::size_t>();
      r.phase = parse_phase(rec.at("phase").get<std::string>());
      r.x = rec.at("x").get<std::vector<double>>();
      r.metrics = rec.at("metrics").get<std::vector<double>>();
      r.fom = rec.at("fom").get<double>();
      r.incumbent_fom = rec.at("incumbent_fom").get<double>();
      if (!rec.at("acquisition_value").is_null()) r.acquisition_value = rec["acquisition_value"].get<double>();
      r.surrogate_queries = rec.at("surrogate_queries").get<std::size_t>();
      r.context_size = rec.at("context_size").get<std::size_t>();
      r.fallback_reason = rec.value("fallback_reason", std::string());
      const auto& tm = rec.at("timings");
      r.timings = {tm.at("surrogate_s").get<double>(), tm.at("acquisition_s").get<double>(),
                   tm.at("evaluation_s").get<double>()};
      t.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed trace: ") + e.what());
  }
  return t;
}

std::size_t surrogate_instance_count(Strategy strategy, const SpecSet& specs) {
  switch (strategy) {
    case Strategy::direct_fom: return 1;
    case Strategy::metric_decomposed: return specs.size();
    case Strategy::constraint_decomposed: return specs.hard_indices().size() + 1;
  }
  return 1;
}

std::vector<double> acquire_direct(std::span<const DiscretePosterior> posteriors, Acquisition acq, double f_star) {
  std::vector<double> scores(posteriors.size());
  for (std::size_t c = 0; c < posteriors.size(); ++c) {
    if (acq == Acquisition::dei) {
      scores[c] = dei(posteriors[c], f_star);
    } else {
      const Moments m = moments(posteriors[c]);
      scores[c] = closed_form_ei({m.mean, std::sqrt(m.variance)}, f_star);
    }
  }
  return scores;
}

std::vector<double> acquire_metric_decomposed(const std::vector<std::vector<DiscretePosterior>>& posteriors,
                                              const SpecSet& specs, double f_star, std::size_t samples, Rng& rng,
                                              MetricScale scale) {
  if (posteriors.size() != specs.size()) throw ContractError("metric_decomposed: one posterior set per spec");
  if (samples == 0) throw ContractError("metric_decomposed: need at least one joint sample");
  const std::size_t n = posteriors.empty() ? 0 : posteriors.front().size();
  for (const auto& p : posteriors) {
    if (p.size() != n) throw ContractError("metric_decomposed: candidate counts differ between metrics");
  }
  std::vector<double> scores(n, 0.0);
  std::vector<double> joint(specs.size());
  for (std::size_t c = 0; c < n; ++c) {
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      for (std::size_t i = 0; i < specs.size(); ++i) {
        const double v = posteriors[i][c].quantile(rng.uniform01());
        joint[i] = scale == MetricScale::log ? std::exp(std::min(v, kMaxLogMetric)) : v;
      }
      sum += std::max(0.0, fom(specs, joint) - f_star);
    }
    scores[c] = sum / static_cast<double>(samples);
  }
  return scores;
}

std::vector<double> acquire_constraint_decomposed(std::span<const DiscretePosterior> objective,
                                                  const std::vector<std::vector<DiscretePosterior>>& margins,
                                                  double f_star_objective, Acquisition acq) {
  for (const auto& m : margins) {
    if (m.size() != objective.size()) throw ContractError("constraint_decomposed: candidate counts differ");
  }
  std::vector<double> scores = acquire_direct(objective, acq, f_star_objective);
  for (std::size_t c = 0; c < scores.size(); ++c) {
    for (const auto& m : margins) scores[c] *= feasibility_mass(m[c], 0.0);
  }
  return scores;
}

std::size_t select_next(std::span<const double> scores) {
  if (scores.empty()) throw ContractError("select_next: no candidates");
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

std::vector<double> evaluate_external(const std::string& command, const SpecSet& specs, std::span<const double> x,
                                      double timeout_seconds) {
  Subprocess process(command);
  process.write_line(json{{"x", std::vector<double>(x.begin(), x.end())}}.dump());
  process.close_stdin();
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_seconds * 1000.0));
  const std::string out = process.read_all(timeout);
  const int status = process.wait();
  if (status != 0) throw TransportError("evaluator '" + command + "' exited with status " + std::to_string(status));
  MetricVector metrics;
  try {
    const json reply = json::parse(out);
    metrics = reply.at("metrics").get<MetricVector>();
  } catch (const json::exception& e) {
    log::error("evaluator reply: " + out);
    throw ProtocolError(std::string("evaluator reply is not {\"metrics\":{...}}: ") + e.what());
  }
  return align(specs, metrics);
}

namespace {

// Everything one optimizer loop needs besides the strategy.
class Loop {
 public:
  explicit Loop(const RunConfig& config) : config_(config), tb_(find_testbench(config.testbench)), rng_(config.seed) {
    config_.validate();
    trace_.config = config_;
    trace_.metric_names = tb_.specs.names();
  }

  const Testbench& testbench() const { return tb_; }
  RunTrace& trace() { return trace_; }

  std::vector<double> evaluate(std::span<const double> x) const {
    if (!config_.external_eval_command.empty()) {
      return evaluate_external(config_.external_eval_command, tb_.specs, x, config_.timeout_seconds);
    }
    return evaluate_aligned(tb_, x);
  }

  void init_phase(std::size_t count, Phase phase) {
    Rng init = rng_.fork(kInitStream);
    for (std::size_t i = 0; i < count; ++i) {
      auto u = uniform_unit_point(tb_.dim(), init);
      IterationRecord rec;
      rec.phase = phase;
      auto x = tb_.space.from_unit(u);
      record(std::move(rec), std::move(x), std::move(u));
    }
  }

  // Evaluates x, appends to the context and the trace.
  void record(IterationRecord rec, std::vector<double> x, std::vector<double> unit) {
    const auto start = std::chrono::steady_clock::now();
    DesignPoint point(tb_.space, std::move(x));
    rec.metrics = evaluate(point.coords());
    rec.timings.evaluation_seconds = seconds_since(start);
    rec.fom = fom(tb_.specs, rec.metrics);
    rec.x.assign(point.coords().begin(), point.coords().end());
    rec.iteration = trace_.records.size() + 1;
    rec.incumbent_fom = trace_.records.empty() ? rec.fom : std::max(trace_.records.back().incumbent_fom, rec.fom);
    unit_x_.push_back(std::move(unit));
    metrics_.push_back(rec.metrics);
    foms_.push_back(rec.fom);
    rec.context_size = unit_x_.size();
    trace_.records.push_back(std::move(rec));
  }

  const std::vector<std::vector<double>>& unit_x() const { return unit_x_; }
  const std::vector<std::vector<double>>& metrics() const { return metrics_; }
  const std::vector<double>& foms() const { return foms_; }
  double incumbent() const { return trace_.records.back().incumbent_fom; }
  Rng stream(std::uint64_t id) const { return rng_.fork(id); }
  const RunConfig& config() const { return config_; }

 private:
  RunConfig config_;
  const Testbench& tb_;
  Rng rng_;
  RunTrace trace_;
  std::vector<std::vector<double>> unit_x_;
  std::vector<std::vector<double>> metrics_;
  std::vector<double> foms_;
};

std::vector<std::unique_ptr<SurrogateBackend>> make_backends(const RunConfig& config, std::size_t count) {
  std::vector<std::unique_ptr<SurrogateBackend>> out;
  std::shared_ptr<ExternalConnection> connection;
  if (config.backend == BackendKind::external) {
    connection = std::make_shared<ExternalConnection>(
        config.backend_command, std::chrono::milliseconds(static_cast<long long>(config.timeout_seconds * 1000.0)));
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (connection) {
      out.push_back(std::make_unique<ExternalBackend>(connection, config.bins));
    } else {
      out.push_back(make_backend({config.backend, config.bins, config.seed * 131 + i, {}}));
    }
  }
  return out;
}

// Per-candidate predictions of one surrogate on a fresh context.
std::vector<DiscretePosterior> predict(SurrogateBackend& backend, const std::vector<std::vector<double>>& x,
                                       std::vector<double> y, std::span<const Query> candidates,
                                       std::size_t& queries) {
  Dataset context{x, std::move(y)};
  backend.set_context(context);
  auto out = backend.predict_batch(candidates);
  if (out.size() != candidates.size()) throw ProtocolError("backend returned the wrong number of posteriors");
  queries += candidates.size();
  return out;
}

double best_objective_score(const SpecSet& specs, const std::vector<std::vector<double>>& metrics) {
  double best_feasible = -std::numeric_limits<double>::infinity();
  double best_any = -std::numeric_limits<double>::infinity();
  for (const auto& m : metrics) {
    const double s = objective_score(specs, m);
    best_any = std::max(best_any, s);
    if (all_hard_met(specs, m)) best_feasible = std::max(best_feasible, s);
  }
  return std::isfinite(best_feasible) ? best_feasible : best_any;
}

}  // namespace

RunTrace run(const RunConfig& config) {
  Loop loop(config);
  const SpecSet& specs = loop.testbench().specs;
  const std::size_t dim = loop.testbench().dim();
  RunTrace& trace = loop.trace();
  trace.method = method_label(config);
  trace.surrogate_instances = surrogate_instance_count(config.strategy, specs);

  loop.init_phase(config.init_count, Phase::init);
  auto backends = make_backends(config, trace.surrogate_instances);
  const auto hard = specs.hard_indices();

  for (std::size_t t = 1; loop.trace().records.size() < config.budget; ++t) {
    Rng rng = loop.stream(kCandidateStreamBase + t);
    std::vector<Query> candidates(config.candidate_count);
    for (auto& q : candidates) q = uniform_unit_point(dim, rng);

    IterationRecord rec;
    rec.phase = Phase::acquisition;
    std::size_t chosen = 0;
    try {
      const auto& x = loop.unit_x();
      std::vector<double> scores;
      auto start = std::chrono::steady_clock::now();
      switch (config.strategy) {
        case Strategy::direct_fom: {
          auto post = predict(*backends[0], x, loop.foms(), candidates, rec.surrogate_queries);
          rec.timings.surrogate_seconds = seconds_since(start);
          start = std::chrono::steady_clock::now();
          scores = acquire_direct(post, config.acquisition, loop.incumbent());
          break;
        }
        case Strategy::metric_decomposed: {
          std::vector<std::vector<DiscretePosterior>> post;
          for (std::size_t i = 0; i < specs.size(); ++i) {
            std::vector<double> y;
            for (const auto& m : loop.metrics()) y.push_back(std::log(std::max(m[i], kMetricFloor)));
            post.push_back(predict(*backends[i], x, std::move(y), candidates, rec.surrogate_queries));
          }
          rec.timings.surrogate_seconds = seconds_since(start);
          start = std::chrono::steady_clock::now();
          scores = acquire_metric_decomposed(post, specs, loop.incumbent(), config.fom_samples, rng, MetricScale::log);
          break;
        }
        case Strategy::constraint_decomposed: {
          std::vector<double> y;
          for (const auto& m : loop.metrics()) y.push_back(objective_score(specs, m));
          auto objective = predict(*backends[0], x, std::move(y), candidates, rec.surrogate_queries);
          std::vector<std::vector<DiscretePosterior>> margins;
          for (std::size_t h = 0; h < hard.size(); ++h) {
            std::vector<double> margin;
            for (const auto& m : loop.metrics()) margin.push_back(constraint_margin(specs[hard[h]], m[hard[h]]));
            margins.push_back(predict(*backends[h + 1], x, std::move(margin), candidates, rec.surrogate_queries));
          }
          rec.timings.surrogate_seconds = seconds_since(start);
          start = std::chrono::steady_clock::now();
          scores = acquire_constraint_decomposed(objective, margins, best_objective_score(specs, loop.metrics()),
                                                 config.acquisition);
          break;
        }
      }
      chosen = select_next(scores);
      rec.acquisition_value = scores[chosen];
      rec.timings.acquisition_seconds = seconds_since(start);
    } catch (const Error& e) {
      Rng fallback = loop.stream(kFallbackStreamBase + t);
      chosen = static_cast<std::size_t>(fallback.uniform_index(candidates.size()));
      rec.phase = Phase::fallback;
      rec.acquisition_value.reset();
      rec.fallback_reason = e.what();
      log::warn_once("optimizer-fallback", std::string("surrogate failure, falling back to a random candidate: ") +
                                               e.what());
    }
    auto x = loop.testbench().space.from_unit(candidates[chosen]);
    loop.record(std::move(rec), std::move(x), std::move(candidates[chosen]));
  }
  return std::move(loop.trace());
}

RunTrace random_search(const RunConfig& config) {
  Loop loop(config);
  RunTrace& trace = loop.trace();
  trace.method = "random_search";
  trace.surrogate_instances = 0;
  loop.init_phase(config.budget, Phase::random);
  return std::move(loop.trace());
}

}  // namespace cpn

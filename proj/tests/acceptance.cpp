// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.
//
//   acceptance [--out DIR] [--only NAME]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpn/gp.hpp"
#include "cpn/harness.hpp"
#include "cpn/log.hpp"
#include "cpn/posterior.hpp"
#include "cpn/rng.hpp"
#include "cpn/testbench.hpp"

#include "oracles.hpp"

using namespace cpn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int precision = 4) {
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome dei_ei_convergence() {
  struct Triple {
    double mu, sigma, f;
  };
  Rng rng(2024);
  std::vector<Triple> triples(100);
  for (auto& t : triples) t = {rng.uniform(-5, 5), rng.uniform(0.1, 3), rng.uniform(-5, 5)};
  auto worst_at = [&](std::size_t k) {
    double worst = 0.0;
    for (const auto& t : triples) {
      const double ei = closed_form_ei({t.mu, t.sigma}, t.f);
      const double d = dei(discretize_gaussian({t.mu, t.sigma}, k, 8.0), t.f);
      worst = std::max(worst, std::abs(d - ei) / std::max(ei, 1e-12));
    }
    return worst;
  };
  const double at1000 = worst_at(1000);
  const double at4096 = worst_at(4096);
  bool halves = true;
  std::string ratios;
  double prev = worst_at(64);
  for (std::size_t k = 128; k <= 4096; k *= 2) {
    const double cur = worst_at(k);
    const double ratio = cur / prev;
    halves = halves && ratio >= 0.4 && ratio <= 0.6;
    ratios += (ratios.empty() ? "" : " ") + num(ratio, 3);
    prev = cur;
  }
  return {at1000 <= 1e-3 && at4096 <= 1e-4 && halves,
          "worst rel err K=1000 " + num(at1000) + " (<=1e-3), K=4096 " + num(at4096) +
              " (<=1e-4), per-doubling ratios [" + ratios + "] (need 0.5 +-20%)"};
}

Outcome posterior_math() {
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(200);
    std::vector<double> c(k), p(k);
    double x = rng.uniform(-10, 10), total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      x += rng.uniform(1e-3, 1.0);
      c[i] = x;
      p[i] = rng.uniform01();
      total += p[i];
    }
    for (auto& v : p) v /= total;
    const DiscretePosterior post(c, p);
    const double f = rng.uniform(c.front() - 1.0, c.back() + 1.0);
    const auto m = moments(post);
    const auto o = oracle::discrete_moments(c, p);
    worst = std::max({worst, std::abs(m.mean - o.mean), std::abs(m.variance - o.variance),
                      std::abs(dei(post, f) - oracle::discrete_ei(c, p, f))});
  }
  return {worst <= 1e-12, "1000 posteriors, worst |lib - oracle| " + num(worst) + " (<=1e-12)"};
}

oracle::Kernel to_oracle(KernelKind k) {
  return k == KernelKind::rbf ? oracle::Kernel::rbf
                              : k == KernelKind::matern52 ? oracle::Kernel::matern52 : oracle::Kernel::linear;
}

GpHyperparams hyper(KernelKind k, double ell, double sv, double nv) {
  GpHyperparams hp;
  hp.kernel = k;
  hp.log_lengthscale = std::log(ell);
  hp.log_signal_variance = std::log(sv);
  hp.log_noise_variance = std::log(nv);
  return hp;
}

Outcome gp_correctness() {
  Rng rng(4242);
  double worst = 0.0;
  int contexts = 0;
  for (auto k : {KernelKind::rbf, KernelKind::matern52, KernelKind::linear}) {
    for (std::size_t n = 1; n <= 20; ++n) {
      for (int rep = 0; rep < 5; ++rep) {
        const std::size_t d = 1 + rng.uniform_index(5);
        Dataset ctx;
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<double> row(d);
          for (auto& v : row) v = rng.uniform01();
          ctx.x.push_back(row);
          ctx.y.push_back(rng.uniform(-3, 3));
        }
        std::vector<Query> q(8, std::vector<double>(d));
        for (auto& row : q) {
          for (auto& v : row) v = rng.uniform01();
        }
        const double ell = rng.uniform(0.1, 1.0), sv = rng.uniform(0.5, 2.0), nv = std::pow(10.0, rng.uniform(-6, -2));
        const auto got = gp_predict(ctx, hyper(k, ell, sv, nv), q);
        const auto want = oracle::gp_dense({to_oracle(k), ell, sv, nv}, ctx.x, ctx.y, q);
        for (std::size_t i = 0; i < q.size(); ++i) {
          worst = std::max(worst, std::abs(got[i].mean - want[i].mean) / std::max(1.0, std::abs(want[i].mean)));
          worst = std::max(worst, std::abs(got[i].std - want[i].std) / std::max(1.0, want[i].std));
        }
        ++contexts;
      }
    }
  }
  double interp = 0.0;
  for (auto k : {KernelKind::rbf, KernelKind::matern52}) {
    Dataset ctx;
    for (int i = 0; i < 15; ++i) {
      ctx.x.push_back({rng.uniform01(), rng.uniform01()});
      ctx.y.push_back(std::sin(3.0 * ctx.x.back()[0]) + ctx.x.back()[1]);
    }
    const auto at = gp_predict(ctx, hyper(k, 0.3, 1.0, kMinNoiseVariance), ctx.x);
    for (std::size_t i = 0; i < ctx.size(); ++i) interp = std::max(interp, std::abs(at[i].mean - ctx.y[i]));
  }
  return {worst <= 1e-8 && interp <= 1e-4, std::to_string(contexts) + " contexts, worst rel diff " + num(worst) +
                                               " (<=1e-8); interpolation error " + num(interp) + " (<=1e-4)"};
}

Outcome structural_contrast() {
  RegressionConfig c;
  c.tasks = {{"ota2-analytic", {"gain_db"}}, {"bandgap-analytic", {"tc_ppm"}}};
  c.backends = {BackendKind::gp_matern, BackendKind::khist};
  c.sizes = {50};
  const auto rows = run_regression_protocol(c);
  auto med = [&](const std::string& bench, const std::string& backend) {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.testbench == bench && r.backend == backend) v.push_back(r.r_squared.value_or(-1e9));
    }
    return median(v);
  };
  const double gp_ota = med("ota2-analytic", "gp_matern"), gp_bg = med("bandgap-analytic", "gp_matern");
  const double kh_ota = med("ota2-analytic", "khist"), kh_bg = med("bandgap-analytic", "khist");
  const double gp_gap = gp_ota - gp_bg, kh_gap = kh_ota - kh_bg;
  return {gp_gap >= 0.2 && kh_gap <= 0.5 * gp_gap,
          "median R2 gp_matern ota2 " + num(gp_ota) + " bandgap " + num(gp_bg) + " gap " + num(gp_gap) +
              " (>=0.2); khist ota2 " + num(kh_ota) + " bandgap " + num(kh_bg) + " gap " + num(kh_gap) +
              " (<= half of gp gap)"};
}

CampaignConfig effectiveness_config() {
  return campaign_config_from_json(nlohmann::json::parse(R"({
    "methods": ["direct_fom+khist+dei", "direct_fom+khist+ei", {"method": "random_search"}],
    "testbenches": "all",
    "seed_count": 10,
    "budget": 100,
    "init_count": 5,
    "candidate_count": 2048,
    "bins": 100,
    "itr_threshold": {"mode": "fraction_of_best", "value": 0.8},
    "ablation": {"dei": "direct_fom+khist+dei", "ei": "direct_fom+khist+ei", "checkpoints": [30, 50]}
  })"));
}

Outcome effectiveness(const CampaignReport& report, const CampaignConfig& config) {
  int wins = 0;
  std::string detail;
  for (const auto& tb : config.testbenches) {
    std::vector<double> dei_f, rs_f;
    for (const auto& r : report.rows) {
      if (r.testbench != tb) continue;
      if (r.method == "direct_fom+khist+dei") dei_f.push_back(r.final_fom);
      if (r.method == "random_search") rs_f.push_back(r.final_fom);
    }
    if (dei_f.size() != config.seeds.size() || rs_f.size() != config.seeds.size()) {
      detail += std::string(detail.empty() ? "" : ";") + " " + tb + " incomplete";
      continue;
    }
    const double a = median(dei_f), b = median(rs_f);
    wins += a > b;
    detail += std::string(detail.empty() ? "" : ";") + " " + tb + " " + num(a) + (a > b ? " > " : " <= ") + num(b);
  }
  return {wins >= 5 && report.errors.empty(), std::to_string(wins) + "/6 benches (need >=5):" + detail};
}

Outcome ablation(const CampaignReport& report, const CampaignConfig& config) {
  // completeness: every bench x seed x checkpoint present
  const std::size_t expected = config.testbenches.size() * config.seeds.size() * 2;
  bool ordered = true;
  std::string detail;
  for (const std::string tb : {"ldo-regime", "chargepump-regime"}) {
    std::map<std::size_t, std::vector<double>> by_cp;
    for (const auto& a : report.ablation) {
      if (a.testbench == tb) by_cp[a.checkpoint].push_back(a.factor);
    }
    const double f30 = median(by_cp[30]), f50 = median(by_cp[50]);
    ordered = ordered && f30 >= f50;
    detail += " " + tb + " median factor @30 " + num(f30) + " @50 " + num(f50) + ";";
  }
  return {report.ablation.size() == expected && ordered,
          std::to_string(report.ablation.size()) + "/" + std::to_string(expected) + " factors;" + detail +
              " need @30 >= @50"};
}

Outcome algorithm_invariants(const fs::path& effectiveness_dir, const fs::path& out) {
  // every strategy on every bench, so all three query-count rules are exercised
  const auto config = campaign_config_from_json(nlohmann::json::parse(R"({
    "methods": ["direct_fom+khist+dei", "metric_decomposed+khist+dei", "constraint_decomposed+khist+dei",
                "constraint_decomposed+gp_matern+ei", {"method": "random_search"}],
    "testbenches": "all",
    "seed_count": 2,
    "budget": 20,
    "candidate_count": 256,
    "bins": 100,
    "fom_samples": 64
  })"));
  const auto report = run_campaign(config, out);
  auto violations = audit_campaign(out);
  const auto more = audit_campaign(effectiveness_dir);
  violations.insert(violations.end(), more.begin(), more.end());
  std::size_t traces = 0;
  for (const auto& dir : {out, effectiveness_dir}) {
    for (const auto& e : fs::directory_iterator(dir / "traces")) traces += e.path().extension() == ".json";
  }
  std::string detail = std::to_string(traces) + " traces audited, " + std::to_string(violations.size()) + " violations";
  if (!violations.empty()) detail += " (first: " + violations.front() + ")";
  if (!report.errors.empty()) detail += ", " + std::to_string(report.errors.size()) + " failed runs";
  return {violations.empty() && report.errors.empty() && traces > 0, detail};
}

Outcome determinism(const fs::path& out) {
  const fs::path config = out / "determinism.json";
  std::ofstream(config) << R"({
  "methods": ["direct_fom+khist+dei", "direct_fom+gp_matern+ei", {"method": "random_search"}],
  "testbenches": ["ota2-analytic", "ldo-regime"],
  "seed_count": 2,
  "budget": 15,
  "candidate_count": 256,
  "workers": 2
})";
  std::string outputs[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = out / ("determinism_" + std::to_string(i));
    fs::remove_all(dir);
    const std::string cmd = std::string(CPN_CLI_PATH) + " campaign run --config " + config.string() + " --out " +
                            dir.string() + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "campaign run exited nonzero"};
    outputs[i] = slurp(dir / "aggregate.csv");
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, "two `cpn campaign run` invocations: aggregate.csv " +
                    std::string(same ? "byte-identical" : "differs") + " (" + std::to_string(outputs[0].size()) +
                    " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out_dir = (fs::temp_directory_path() / "cpn_acceptance").string();
  std::string only;
  app.add_option("--out", out_dir, "Scratch directory for campaign outputs")->capture_default_str();
  app.add_option("--only", only, "Run a single criterion by name");
  CLI11_PARSE(app, argc, argv);
  log::set_level(log::Level::error);

  const fs::path out(out_dir);
  fs::create_directories(out);

  int failed = 0;
  auto report = [&](const std::string& name, double limit_s, const std::function<Outcome()>& check,
                    double shared_s = 0.0) {
    if (!only.empty() && only != name) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = shared_s + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    const std::string limit = limit_s > 1e8 ? "" : " (limit " + num(limit_s, 4) + "s" + (in_time ? ")" : ", exceeded)");
    std::printf("%s %s: %s; %.1fs%s\n", pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), s, limit.c_str());
    std::fflush(stdout);
  };

  report("dei-ei-convergence", 5, dei_ei_convergence);
  report("posterior-math", 1, posterior_math);
  report("gp-correctness", 10, gp_correctness);
  report("structural-contrast", 300, structural_contrast);

  const auto eff_config = effectiveness_config();
  const fs::path eff_dir = out / "effectiveness";
  CampaignReport eff;
  double campaign_s = 0.0;
  const bool need_campaign = only.empty() || only == "effectiveness" || only == "ablation" || only == "loop-invariants";
  if (need_campaign) {
    fs::remove_all(eff_dir);
    const auto t0 = std::chrono::steady_clock::now();
    eff = run_campaign(eff_config, eff_dir);
    campaign_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  // the dei, ei and random runs share one campaign; its time counts against both limits
  report("effectiveness", 900, [&] { return effectiveness(eff, eff_config); }, campaign_s);
  report("ablation", 1200, [&] { return ablation(eff, eff_config); }, campaign_s);
  constexpr double kNoLimit = 1e9;
  report("loop-invariants", kNoLimit, [&] {
    fs::remove_all(out / "strategies");
    return algorithm_invariants(eff_dir, out / "strategies");
  });
  report("determinism", kNoLimit, [&] { return determinism(out); });

  std::printf("%d criteria failed\n", failed);
  return failed;
}

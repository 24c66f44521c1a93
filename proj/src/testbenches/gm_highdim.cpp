// High-dimensional degenerated transconductor array.
//
// Six source-degenerated input cells sum into one output; six load devices set
// the input-referred noise; six output devices set the load resistance and the
// non-dominant poles. The cell-to-bias/current wiring, degeneration
// resistances, cell weights and flicker coefficients are drawn from the
// testbench seed, so the 53 variables have uneven, mostly smooth influence.
#include "cpn/rng.hpp"
#include "testbenches/common.hpp"

namespace cpn::bench {

namespace {

constexpr std::uint64_t kSeed = 0x474d2d3533ULL;  // "GM-53"
constexpr int kCells = 6;
constexpr int kWidths = 18;
constexpr int kBiases = 9;
constexpr int kCurrents = 8;
constexpr double kBoltzmannT = 1.380649e-23 * 300.0;
constexpr double kGamma = 2.0 / 3.0;
constexpr double kSignal = 0.05;       // V
constexpr double kOutputCap = 1e-12;

struct Wiring {
  int bias[kCells];
  int load_current[kCells];
  int out_current[2];
  double r_degen[kCells];
  double weight[kCells];
  double flicker[kCells];
};

Wiring generate_wiring() {
  Rng rng(kSeed);
  Wiring w{};
  for (int c = 0; c < kCells; ++c) {
    w.bias[c] = static_cast<int>(rng.uniform_index(kBiases));
    w.load_current[c] = static_cast<int>(rng.uniform_index(kCurrents));
    w.r_degen[c] = rng.uniform(500.0, 5000.0);
    w.weight[c] = rng.uniform(0.5, 1.5);
    w.flicker[c] = rng.uniform(0.5e-24, 4e-24);
  }
  w.out_current[0] = static_cast<int>(rng.uniform_index(kCurrents));
  w.out_current[1] = static_cast<int>(rng.uniform_index(kCurrents));
  return w;
}

}  // namespace

Testbench make_gm_highdim() {
  std::vector<Variable> vars;
  for (int j = 0; j < kWidths; ++j) vars.push_back({"w_" + std::to_string(j), 1e-6, 50e-6});
  for (int j = 0; j < kWidths; ++j) vars.push_back({"l_" + std::to_string(j), 0.18e-6, 2e-6});
  for (int j = 0; j < kBiases; ++j) vars.push_back({"vg_" + std::to_string(j), 0.5, 1.0});
  for (int j = 0; j < kCurrents; ++j) vars.push_back({"i_" + std::to_string(j), 5e-6, 100e-6});

  SpecSet specs({target_max("gm_ms", 2.0), hard_max("pm_deg", 60.0), hard_min("noise_nv", 5.0),
                 hard_min("thd_pct", 0.05)});

  const Wiring wiring = generate_wiring();
  MetricFunction metrics = [wiring](std::span<const double> x) {
    auto w = [&](int j) { return x[static_cast<std::size_t>(j)]; };
    auto l = [&](int j) { return x[static_cast<std::size_t>(kWidths + j)]; };
    auto vg = [&](int j) { return x[static_cast<std::size_t>(2 * kWidths + j)]; };
    auto cur = [&](int j) { return x[static_cast<std::size_t>(2 * kWidths + kBiases + j)]; };

    double gm_total = 0.0;
    double noise_psd = 0.0;
    double thd = 0.0;
    for (int c = 0; c < kCells; ++c) {
      const double vov = vg(wiring.bias[c]) - kVth;
      const double gm = gm_from_vov(w(c), l(c), vov);
      const double degen = 1.0 + gm * wiring.r_degen[c];
      gm_total += wiring.weight[c] * gm / degen;
      const double gm_load = gm_from_current(w(6 + c), l(6 + c), cur(wiring.load_current[c]));
      noise_psd += 4.0 * kBoltzmannT * kGamma / gm * (1.0 + gm_load / gm) + wiring.flicker[c] / (w(c) * l(c)) * 1e-9;
      const double distortion = kSignal / (4.0 * vov) / degen;
      thd += wiring.weight[c] * distortion * distortion;
    }
    const double noise_nv = 1e9 * std::sqrt(noise_psd / kCells);
    const double thd_pct = 100.0 * thd / kCells + 1e-4;

    double c_out = kOutputCap;
    for (int j = 12; j < 18; ++j) c_out += kCox * w(j) * l(j);
    const double i_o = cur(wiring.out_current[0]);
    const double r_load = parallel(output_resistance(l(12), i_o), output_resistance(l(13), i_o));
    const double gm_o1 = gm_from_current(w(14), l(14), cur(wiring.out_current[1]));
    const double gm_o2 = gm_from_current(w(15), l(15), i_o);
    const double dc = gm_total * r_load;
    double pm = 180.0;
    if (dc > 1.0) {
      const double poles[3] = {1.0 / (kTwoPi * r_load * c_out), pole(gm_o1, 4.0 * kCox * w(16) * l(16) + 50e-15),
                               pole(gm_o2, 4.0 * kCox * w(17) * l(17) + 50e-15)};
      pm = primitives::unity_gain_crossover(dc, poles, {}).phase_margin_deg;
    }
    return std::vector<double>{1e3 * gm_total, std::max(pm, kPhaseMarginFloorDeg), noise_nv, thd_pct};
  };

  Testbench tb{"gm-highdim",
               "53-variable degenerated transconductor: maximize Gm subject to phase margin, noise and THD",
               make_space(vars),
               names_of(vars),
               std::move(specs),
               std::move(metrics),
               Provenance::generated,
               kSeed,
               {}};
  nlohmann::json cells = nlohmann::json::array();
  for (int c = 0; c < kCells; ++c) {
    cells.push_back({{"bias_index", wiring.bias[c]},
                     {"load_current_index", wiring.load_current[c]},
                     {"r_degen", wiring.r_degen[c]},
                     {"weight", wiring.weight[c]},
                     {"flicker", wiring.flicker[c]}});
  }
  tb.constants = {{"device", device_constants()},
                  {"cells", cells},
                  {"output_current_indices", {wiring.out_current[0], wiring.out_current[1]}},
                  {"signal_amplitude", kSignal},
                  {"output_cap", kOutputCap}};
  return tb;
}

}  // namespace cpn::bench

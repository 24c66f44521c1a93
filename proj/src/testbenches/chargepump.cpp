// Cascoded charge pump with replica-amplifier correction, inside a PLL loop.
//
// Each pump branch is a mirrored source device, a cascode and a switch. The
// branch current is gated by the product of two regime indicators (source and
// cascode in saturation), so it is piecewise in the output voltage. Matching
// and deviation are measured over three output voltages; stability is the
// phase margin of the type-2 PLL loop the pump drives. Per-device threshold
// offsets and trim coefficients are drawn from the testbench seed. The cost
// metric is an invented area-plus-power composite.
#include "cpn/rng.hpp"
#include "testbenches/common.hpp"

namespace cpn::bench {

namespace {

constexpr std::uint64_t kSeed = 0x4350554d50ULL;  // "CPUMP"
constexpr double kSupply = 1.8;                     // V
constexpr double kOutputs[3] = {0.5, 0.9, 1.3};     // V; middle entry is the reference
constexpr double kVcoGain = 2.0 * std::numbers::pi * 1e9;  // rad/s/V
constexpr double kDivider = 32.0;
constexpr double kIntegratorPole = 0.1;             // Hz, stands in for the two integrators
constexpr double kReferenceFrequency = 50e6;        // Hz
constexpr double kCapDensity = 2e-3;                // F/m^2
constexpr double kCollapsedFraction = 0.3;
constexpr double kPelgrom = 5e-3 * 1e-6;            // V*m
constexpr int kTrims = 7;

struct Mismatch {
  double dvth_up;
  double dvth_dn;
  double dvth_mirror;
  double trim_up[kTrims];
  double trim_dn[kTrims];
};

Mismatch generate_mismatch() {
  Rng rng(kSeed);
  Mismatch m{};
  m.dvth_up = rng.uniform(-1.0, 1.0);
  m.dvth_dn = rng.uniform(-1.0, 1.0);
  m.dvth_mirror = rng.uniform(-1.0, 1.0);
  for (int k = 0; k < kTrims; ++k) {
    m.trim_up[k] = rng.uniform(-0.03, 0.03);
    m.trim_dn[k] = rng.uniform(-0.03, 0.03);
  }
  return m;
}

struct Branch {
  double w_src, l_src, w_cas, l_cas, w_sw, l_sw;
  double v_cas, v_sw;
};

// Branch current at a given distance from its own rail.
double branch_current(const Branch& b, double i0, double headroom) {
  const double vov_src = vov_from_current(b.w_src, b.l_src, i0);
  const double vov_cas = vov_from_current(b.w_cas, b.l_cas, i0);
  const double r_sw = 1.0 / (kKp * (b.w_sw / b.l_sw) * std::max(b.v_sw - kVth, 0.01));
  const double node = b.v_cas - vov_cas;
  const double s_src = primitives::regime_indicator(node - vov_src, 0.0);
  const double s_cas = primitives::regime_indicator(headroom - i0 * r_sw - node - vov_cas, 0.0);
  const double r_out = output_resistance(b.l_cas, i0) *
                       (1.0 + gm_from_current(b.w_cas, b.l_cas, i0) * output_resistance(b.l_src, i0) * s_src);
  const double gate = s_src * s_cas;
  return i0 * (kCollapsedFraction + (1.0 - kCollapsedFraction) * gate) + headroom / r_out;
}

}  // namespace

Testbench make_chargepump() {
  std::vector<Variable> vars = {
      {"w_src_up", 2e-6, 20e-6},   {"l_src_up", 0.5e-6, 2e-6}, {"w_cas_up", 1e-6, 40e-6},  {"l_cas_up", 0.18e-6, 2e-6},
      {"w_sw_up", 1e-6, 40e-6},   {"l_sw_up", 0.18e-6, 1e-6},  {"w_src_dn", 2e-6, 20e-6},   {"l_src_dn", 0.5e-6, 2e-6},
      {"w_cas_dn", 1e-6, 40e-6},  {"l_cas_dn", 0.18e-6, 2e-6}, {"w_sw_dn", 1e-6, 40e-6},   {"l_sw_dn", 0.18e-6, 1e-6},
      {"w_mir", 2e-6, 20e-6},     {"l_mir", 0.5e-6, 2e-6},    {"v_cas_up", 0.15, 0.5},    {"v_cas_dn", 0.15, 0.5},
      {"v_sw_up", 0.6, 1.8},      {"v_sw_dn", 0.6, 1.8},       {"i_ref", 5e-6, 50e-6},     {"r_lf", 1e3, 50e3},
      {"c_1", 5e-12, 50e-12},     {"c_2", 0.2e-12, 5e-12},     {"w_amp", 2e-6, 40e-6},     {"l_amp", 0.18e-6, 2e-6},
      {"i_amp", 2e-6, 50e-6},     {"w_dummy_up", 0.5e-6, 20e-6}, {"l_dummy_up", 0.18e-6, 1e-6},
      {"w_dummy_dn", 0.5e-6, 20e-6}, {"l_dummy_dn", 0.18e-6, 1e-6},
  };
  for (int k = 0; k < kTrims; ++k) vars.push_back({"trim_" + std::to_string(k), -1.0, 1.0});

  SpecSet specs({target_min("cost", 20.0), hard_min("mismatch_pct", 10.0), hard_min("deviation_pct", 5.0),
                 hard_max("stability_deg", 45.0)});

  const Mismatch mm = generate_mismatch();
  MetricFunction metrics = [mm](std::span<const double> x) {
    const Branch up{x[0], x[1], x[2], x[3], x[4], x[5], x[14], x[16]};
    const Branch dn{x[6], x[7], x[8], x[9], x[10], x[11], x[15], x[17]};
    const double w_mir = x[12], l_mir = x[13], i_ref = x[18], r_lf = x[19], c_1 = x[20], c_2 = x[21];
    const double w_amp = x[22], l_amp = x[23], i_amp = x[24];
    const double w_dummy_up = x[25], l_dummy_up = x[26], w_dummy_dn = x[27], l_dummy_dn = x[28];

    double trim_up = 1.0;
    double trim_dn = 1.0;
    for (int k = 0; k < kTrims; ++k) {
      trim_up += mm.trim_up[k] * x[static_cast<std::size_t>(29 + k)];
      trim_dn += mm.trim_dn[k] * x[static_cast<std::size_t>(29 + k)];
    }

    // mirrored currents with area-scaled threshold offsets (1 + gm/I * dvth)
    auto mirrored = [&](const Branch& b, double dvth_unit, double trim) {
      const double i_nom = i_ref * (b.w_src / b.l_src) / (w_mir / l_mir);
      const double vov = vov_from_current(b.w_src, b.l_src, i_nom);
      const double dvth = kPelgrom * (dvth_unit / std::sqrt(b.w_src * b.l_src) -
                                      mm.dvth_mirror / std::sqrt(w_mir * l_mir));
      return i_nom * trim * std::max(1.0 - kAlpha * dvth / vov, 0.05);
    };
    const double i0_up = mirrored(up, mm.dvth_up, trim_up);
    const double i0_dn = mirrored(dn, mm.dvth_dn, trim_dn);

    double i_up[3];
    double i_dn[3];
    for (int k = 0; k < 3; ++k) {
      i_up[k] = branch_current(up, i0_up, kSupply - kOutputs[k]);
      i_dn[k] = branch_current(dn, i0_dn, kOutputs[k]);
    }

    // replica amplifier removes part of the mid-rail mismatch
    const double a_amp = gm_from_current(w_amp, l_amp, 0.5 * i_amp) * output_resistance(l_amp, 0.5 * i_amp);
    const double correction = 0.8 * a_amp / (a_amp + 10.0);
    const double charge_up = kCox * (up.w_sw * up.l_sw - 0.5 * w_dummy_up * l_dummy_up) * (up.v_sw - kVth);
    const double charge_dn = kCox * (dn.w_sw * dn.l_sw - 0.5 * w_dummy_dn * l_dummy_dn) * (dn.v_sw - kVth);
    const double i_inject = (charge_up - charge_dn) * kReferenceFrequency;
    const double i_avg = 0.5 * (i_up[1] + i_dn[1]);
    const double mismatch =
        100.0 * (std::abs(i_up[1] - i_dn[1]) * (1.0 - correction) + std::abs(i_inject)) / i_avg + 0.01;

    double deviation = 0.0;
    for (int k = 0; k < 3; ++k) {
      deviation = std::max(deviation, std::abs(i_up[k] - i_up[1]) / i_up[1]);
      deviation = std::max(deviation, std::abs(i_dn[k] - i_dn[1]) / i_dn[1]);
    }
    deviation = 100.0 * deviation + 0.01;

    const double w0 = kTwoPi * kIntegratorPole;
    const double dc = i_avg * kVcoGain / (kDivider * (c_1 + c_2) * w0 * w0);
    const double poles[3] = {kIntegratorPole, kIntegratorPole, (c_1 + c_2) / (kTwoPi * r_lf * c_1 * c_2)};
    const double zeros[1] = {1.0 / (kTwoPi * r_lf * c_1)};
    const double pm = primitives::unity_gain_crossover(dc, poles, zeros).phase_margin_deg;

    const double area_m2 = up.w_src * up.l_src + up.w_cas * up.l_cas + up.w_sw * up.l_sw + dn.w_src * dn.l_src +
                           dn.w_cas * dn.l_cas + dn.w_sw * dn.l_sw + w_mir * l_mir + 2.0 * w_amp * l_amp +
                           w_dummy_up * l_dummy_up + w_dummy_dn * l_dummy_dn + (c_1 + c_2) / kCapDensity;
    const double power_w = kSupply * (i_ref + i0_up + i0_dn + i_amp);
    const double cost = 1e-3 * area_m2 * 1e12 + 1e4 * power_w;
    return std::vector<double>{cost, mismatch, deviation, std::max(pm, kPhaseMarginFloorDeg)};
  };

  Testbench tb{"chargepump-regime",
               "cascoded charge pump in a PLL loop: minimize an area/power cost subject to matching, deviation and "
               "loop stability",
               make_space(vars),
               names_of(vars),
               std::move(specs),
               std::move(metrics),
               Provenance::generated,
               kSeed,
               {}};
  tb.constants = {{"device", device_constants()},
                  {"supply", kSupply},
                  {"output_voltages", {kOutputs[0], kOutputs[1], kOutputs[2]}},
                  {"vco_gain", kVcoGain},
                  {"divider", kDivider},
                  {"integrator_pole", kIntegratorPole},
                  {"reference_frequency", kReferenceFrequency},
                  {"cap_density", kCapDensity},
                  {"collapsed_fraction", kCollapsedFraction},
                  {"pelgrom", kPelgrom},
                  {"dvth_unit", {{"up", mm.dvth_up}, {"down", mm.dvth_dn}, {"mirror", mm.dvth_mirror}}},
                  {"trim_up", std::vector<double>(mm.trim_up, mm.trim_up + kTrims)},
                  {"trim_down", std::vector<double>(mm.trim_dn, mm.trim_dn + kTrims)}};
  return tb;
}

}  // namespace cpn::bench

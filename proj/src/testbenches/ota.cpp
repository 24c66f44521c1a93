// Two- and three-stage Miller-compensated amplifiers.
//
// Each stage's gain is gm * (parallel output resistances); gm follows the
// power-law device model from the stage's overdrive, so the input pair cuts
// off (and the gain drops to its floor) at zero overdrive. The open-loop
// response is a real-pole / real-zero rational function whose dominant pole is
// Miller-multiplied; GBW and phase margin come from its 0 dB crossover.
#include "testbenches/common.hpp"

namespace cpn::bench {

namespace {

constexpr double kOta2LoadCap = 5e-12;
constexpr double kOta3LoadCap = 10e-12;
constexpr double kBiasBranch = 10e-6;
constexpr double kMirrorCapScale = 2.0;

struct Loop {
  double dc_gain;
  std::vector<double> poles;
  std::vector<double> zeros;
};

// {gain_db, pm_deg, gbw_hz} of a loop
std::vector<double> loop_metrics(const Loop& loop) {
  if (!(loop.dc_gain > 1.0)) {
    return {kGainFloorDb, 180.0, primitives::kCrossoverLow};
  }
  const auto cross = primitives::unity_gain_crossover(loop.dc_gain, loop.poles, loop.zeros);
  return {gain_db(loop.dc_gain), std::max(cross.phase_margin_deg, kPhaseMarginFloorDeg), cross.frequency};
}

}  // namespace

Testbench make_ota2() {
  const std::vector<Variable> vars = {
      {"w_in", 2e-6, 40e-6},   {"l_in", 0.18e-6, 1e-6},  {"w_load", 2e-6, 40e-6}, {"l_load", 0.18e-6, 1e-6},
      {"w_out", 5e-6, 100e-6}, {"l_out", 0.18e-6, 1e-6}, {"vgs_in", 0.45, 0.85},  {"vov_out", 0.08, 0.4},
      {"i_tail", 10e-6, 100e-6}, {"i_out", 20e-6, 400e-6}, {"c_c", 0.5e-12, 5e-12}, {"r_z", 200.0, 5000.0},
  };
  SpecSet specs({hard_max("gain_db", 70.0), hard_max("pm_deg", 60.0), hard_max("gbw_hz", 200e6),
                 target_min("current", 150e-6)});

  MetricFunction metrics = [](std::span<const double> x) {
    const double w_in = x[0], l_in = x[1], w_load = x[2], l_load = x[3], w_out = x[4], l_out = x[5];
    const double vov_in = x[6] - kVth, vov_out = x[7], i_tail = x[8], i_out = x[9], c_c = x[10], r_z = x[11];

    const double i_branch = 0.5 * i_tail;
    const double gm_in = gm_from_vov(w_in, l_in, vov_in);
    const double r1 = parallel(output_resistance(l_in, i_branch), output_resistance(l_load, i_branch));
    const double gm_out = gm_from_vov(w_out, l_out, vov_out);
    const double r2 = 0.5 * output_resistance(l_out, i_out);
    const double a1 = gm_in * r1;
    const double a2 = gm_out * r2;

    Loop loop;
    loop.dc_gain = a1 * a2;
    const double c_out = kOta2LoadCap + kCox * w_out * l_out;
    const double gm_mirror = gm_from_current(w_load, l_load, i_branch);
    loop.poles = {1.0 / (kTwoPi * r1 * c_c * std::max(a2, 1.0)), pole(gm_out, c_out),
                  pole(gm_mirror, kMirrorCapScale * kCox * w_load * l_load)};
    loop.zeros = {1.0 / (kTwoPi * c_c * r_z)};
    auto m = loop_metrics(loop);
    m.push_back(i_tail + i_out + kBiasBranch);
    return m;
  };

  Testbench tb{"ota2-analytic",
               "two-stage Miller amplifier: minimize supply current subject to gain, phase margin and GBW",
               make_space(vars),
               names_of(vars),
               std::move(specs),
               std::move(metrics),
               Provenance::analytic,
               0,
               {}};
  tb.constants = {{"device", device_constants()},
                  {"load_cap", kOta2LoadCap},
                  {"bias_branch", kBiasBranch},
                  {"mirror_cap_scale", kMirrorCapScale}};
  return tb;
}

Testbench make_ota3() {
  const std::vector<Variable> vars = {
      {"w_in", 2e-6, 40e-6},     {"l_in", 0.18e-6, 1e-6},   {"w_load", 2e-6, 40e-6},  {"l_load", 0.18e-6, 1e-6},
      {"vgs_in", 0.45, 0.85},    {"w_mid", 4e-6, 80e-6},    {"l_mid", 0.18e-6, 1e-6}, {"vov_mid", 0.08, 0.4},
      {"w_out", 10e-6, 200e-6},  {"l_out", 0.18e-6, 1e-6},  {"vov_out", 0.08, 0.4},   {"i_tail", 10e-6, 100e-6},
      {"i_mid", 10e-6, 200e-6},  {"i_out", 20e-6, 500e-6},  {"c_c1", 0.5e-12, 8e-12}, {"c_c2", 0.2e-12, 4e-12},
      {"r_z", 200.0, 5000.0},    {"w_tail", 2e-6, 40e-6},
  };
  SpecSet specs({hard_max("gain_db", 130.0), hard_max("pm_deg", 55.0), hard_max("gbw_hz", 5e6),
                 target_min("current", 250e-6)});

  MetricFunction metrics = [](std::span<const double> x) {
    const double w_in = x[0], l_in = x[1], w_load = x[2], l_load = x[3], vov_in = x[4] - kVth;
    const double w_mid = x[5], l_mid = x[6], vov_mid = x[7], w_out = x[8], l_out = x[9], vov_out = x[10];
    const double i_tail = x[11], i_mid = x[12], i_out = x[13], c_c1 = x[14], c_c2 = x[15], r_z = x[16];
    const double w_tail = x[17];

    const double i_branch = 0.5 * i_tail;
    const double gm_in = gm_from_vov(w_in, l_in, vov_in);
    const double r1 = parallel(output_resistance(l_in, i_branch), output_resistance(l_load, i_branch));
    const double gm_mid = gm_from_vov(w_mid, l_mid, vov_mid);
    const double r2 = 0.5 * output_resistance(l_mid, i_mid);
    const double gm_out = gm_from_vov(w_out, l_out, vov_out);
    const double r3 = 0.5 * output_resistance(l_out, i_out);
    const double a1 = gm_in * r1;
    const double a2 = gm_mid * r2;
    const double a3 = gm_out * r3;

    Loop loop;
    loop.dc_gain = a1 * a2 * a3;
    const double c_out = kOta3LoadCap + kCox * w_out * l_out;
    const double gm_mirror = gm_from_current(w_load, l_load, i_branch);
    // tail-node parasitic grows with the tail device
    const double c_tail = kMirrorCapScale * kCox * (w_load * l_load + 0.5 * w_tail * 1e-6);
    loop.poles = {1.0 / (kTwoPi * r1 * c_c1 * std::max(a2 * a3, 1.0)), pole(gm_mid, c_c2 * 4.0),
                  pole(gm_out, c_out) * (1.0 + c_c2 / c_c1), pole(gm_mirror, c_tail)};
    loop.zeros = {1.0 / (kTwoPi * c_c1 * r_z)};
    auto m = loop_metrics(loop);
    m.push_back(i_tail + i_mid + i_out + kBiasBranch);
    return m;
  };

  Testbench tb{"ota3-analytic",
               "three-stage nested-Miller amplifier: minimize supply current subject to gain, phase margin and GBW",
               make_space(vars),
               names_of(vars),
               std::move(specs),
               std::move(metrics),
               Provenance::analytic,
               0,
               {}};
  tb.constants = {{"device", device_constants()},
                  {"load_cap", kOta3LoadCap},
                  {"bias_branch", kBiasBranch},
                  {"mirror_cap_scale", kMirrorCapScale}};
  return tb;
}

}  // namespace cpn::bench

// Bandgap reference with exponential leakage branches.
//
// Output voltage over temperature is a CTAT/PTAT pair (linear in T), an
// intrinsic VBE curvature term, and four exp_law branches whose weights and
// exponents are design variables. The temperature-coefficient metric is the
// curvature of that sum from a three-point stencil at -20, 27 and 85 degC;
// the exponential branches can cancel the intrinsic curvature in a narrow
// valley and dominate it by orders of magnitude elsewhere.
#include "testbenches/common.hpp"

namespace cpn::bench {

namespace {

constexpr double kT0 = 300.15;
constexpr double kTemps[3] = {253.15, 300.15, 358.15};
constexpr double kVbe0 = 0.65;
constexpr double kCtatSlope = -2e-3;     // V/K
constexpr double kEtaBase = 3.5;
constexpr double kEtaMirror = 0.1;       // curvature change per ln(mirror ratio)
constexpr double kLeakageScale = 2e-10;  // A
constexpr double kTcFloor = 1.25;        // ppm/degC
constexpr double kPsrrFrequency = 100e3;
constexpr double kFilterResistance = 100e3;
constexpr double kLoopCap = 2e-12;
constexpr int kBranches = 4;

}  // namespace

Testbench make_bandgap() {
  std::vector<Variable> vars;
  for (int j = 0; j < kBranches; ++j) vars.push_back({"v_exp_" + std::to_string(j), 0.05, 0.40});
  for (int j = 0; j < kBranches; ++j) vars.push_back({"r_exp_" + std::to_string(j), 1e3, 20e3});
  const std::vector<Variable> rest = {
      {"k_ptat", 2.0, 12.0},        {"n_area", 4.0, 24.0},       {"w_m1", 1e-6, 20e-6},       {"l_m1", 0.5e-6, 5e-6},
      {"w_m2", 1e-6, 20e-6},        {"l_m2", 0.5e-6, 5e-6},      {"w_amp", 1e-6, 40e-6},      {"l_amp", 0.18e-6, 2e-6},
      {"i_bias", 1e-6, 20e-6},      {"c_filter", 0.5e-12, 10e-12}, {"r_out", 1e3, 50e3},      {"n_ideal", 1.0, 1.6},
  };
  vars.insert(vars.end(), rest.begin(), rest.end());

  SpecSet specs({target_min("tc_ppm", 10.0), hard_min("current", 40e-6), hard_max("psrr_db", 25.0)});

  MetricFunction metrics = [](std::span<const double> x) {
    const double k_ptat = x[8], n_area = x[9], w_m1 = x[10], l_m1 = x[11], w_m2 = x[12], l_m2 = x[13];
    const double w_amp = x[14], l_amp = x[15], i_bias = x[16], c_filter = x[17], r_out = x[18], n_ideal = x[19];

    const double mirror_ratio = (w_m2 / l_m2) / (w_m1 / l_m1);
    const double eta = kEtaBase + kEtaMirror * std::log(mirror_ratio);

    auto reference = [&](double t, bool with_branches) {
      const double vt = primitives::thermal_voltage(t);
      double v = kVbe0 + kCtatSlope * (t - kT0) + k_ptat * vt * std::log(n_area) - eta * vt * std::log(t / kT0);
      if (with_branches) {
        for (int j = 0; j < kBranches; ++j) v += kLeakageScale * x[4 + j] * primitives::exp_law(x[j], n_ideal, vt);
      }
      return v;
    };
    const double v1 = reference(kTemps[0], true);
    const double v2 = reference(kTemps[1], true);
    const double v3 = reference(kTemps[2], true);
    const double h1 = kTemps[1] - kTemps[0];
    const double h2 = kTemps[2] - kTemps[1];
    const double curvature = 2.0 * ((v3 - v2) / h2 - (v2 - v1) / h1) / (h1 + h2);
    const double span = kTemps[2] - kTemps[0];
    const double nominal = std::max(reference(kTemps[1], false), 0.3);
    const double bow_ppm = 1e6 * std::abs(curvature) * span / (8.0 * nominal);
    const double tc = std::hypot(bow_ppm, kTcFloor);

    double current = i_bias * (1.0 + mirror_ratio);
    const double vt0 = primitives::thermal_voltage(kT0);
    for (int j = 0; j < kBranches; ++j) current += kLeakageScale * primitives::exp_law(x[j], n_ideal, vt0);

    const double gm_amp = gm_from_current(w_amp, l_amp, i_bias);
    const double loop_gain = std::max(gm_amp * r_out, 1.0 + 1e-9);
    const double p_loop = 1.0 / (kTwoPi * r_out * kLoopCap * loop_gain);
    const double p_filter = 1.0 / (kTwoPi * kFilterResistance * c_filter);
    // supply-to-output transfer: 1/A0, rising past the loop pole, filtered above p_filter
    const double z[1] = {p_loop};
    const double p[1] = {p_filter};
    const auto supply = primitives::rational_response(kPsrrFrequency, 1.0 / loop_gain, p, z);
    const double psrr = std::max(-supply.magnitude_db, kGainFloorDb);

    return std::vector<double>{tc, current, psrr};
  };

  Testbench tb{"bandgap-analytic",
               "bandgap reference: minimize temperature-coefficient curvature subject to current and PSRR",
               make_space(vars),
               names_of(vars),
               std::move(specs),
               std::move(metrics),
               Provenance::analytic,
               0,
               {}};
  tb.constants = {{"device", device_constants()},
                  {"temperatures_k", {kTemps[0], kTemps[1], kTemps[2]}},
                  {"vbe0", kVbe0},
                  {"ctat_slope", kCtatSlope},
                  {"eta_base", kEtaBase},
                  {"eta_mirror", kEtaMirror},
                  {"leakage_scale", kLeakageScale},
                  {"tc_floor_ppm", kTcFloor},
                  {"psrr_frequency", kPsrrFrequency},
                  {"filter_resistance", kFilterResistance},
                  {"loop_cap", kLoopCap}};
  return tb;
}

}  // namespace cpn::bench

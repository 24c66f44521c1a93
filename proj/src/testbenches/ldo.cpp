// Low-dropout regulator whose pass device moves between saturation and triode.
//
// The loop response is a blend of two rational responses, one per pass-device
// regime, weighted by a regime indicator on the pass device's drain-source
// headroom. Dropping into triode collapses the pass-stage gain and moves the
// output pole, so PSRR, GBW and phase margin change sharply at the boundary.
#include "testbenches/common.hpp"

namespace cpn::bench {

namespace {

constexpr double kSupply = 1.8;          // V
constexpr double kLoadCurrent = 10e-3;   // A
constexpr double kPsrrFrequency = 10e3;  // Hz
constexpr double kCapDensity = 2e-3;     // F/m^2 for on-chip MIM caps
constexpr double kTriodeGmScale = 0.2;
constexpr double kMinHeadroom = 1e-3;    // V

struct Regime {
  double dc_gain;
  std::vector<double> poles;
  std::vector<double> zeros;
};

struct Blend {
  const Regime& sat;
  const Regime& tri;
  double s;  // saturation weight

  primitives::Response at(double f) const {
    const auto a = primitives::rational_response(f, sat.dc_gain, sat.poles, sat.zeros);
    const auto b = primitives::rational_response(f, tri.dc_gain, tri.poles, tri.zeros);
    const double mag = s * std::pow(10.0, a.magnitude_db / 20.0) + (1.0 - s) * std::pow(10.0, b.magnitude_db / 20.0);
    return {20.0 * std::log10(mag), s * a.phase_deg + (1.0 - s) * b.phase_deg};
  }
};

// 0 dB crossing of the blended loop, bisected in log frequency
primitives::Crossover blended_crossover(const Blend& loop) {
  double lo = std::log10(primitives::kCrossoverLow);
  double hi = std::log10(primitives::kCrossoverHigh);
  auto mag = [&](double lf) { return loop.at(std::pow(10.0, lf)).magnitude_db; };
  primitives::Crossover out;
  if (mag(lo) <= 0.0) {
    hi = lo;
  } else if (mag(hi) > 0.0) {
    out.bounded = false;
    lo = hi;
  } else {
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double m = mag(mid);
      if (std::abs(m) < 1e-6) {
        lo = hi = mid;
        break;
      }
      (m > 0.0 ? lo : hi) = mid;
    }
  }
  out.frequency = std::pow(10.0, 0.5 * (lo + hi));
  out.phase_margin_deg = 180.0 + loop.at(out.frequency).phase_deg;
  return out;
}

}  // namespace

Testbench make_ldo() {
  const std::vector<Variable> vars = {
      {"w_pass", 200e-6, 5e-3},    {"l_pass", 0.18e-6, 1e-6},   {"w_ea_in", 2e-6, 40e-6},  {"l_ea_in", 0.18e-6, 2e-6},
      {"w_ea_load", 2e-6, 40e-6},  {"l_ea_load", 0.18e-6, 2e-6}, {"vgs_ea", 0.5, 0.9},      {"i_ea", 2e-6, 50e-6},
      {"r_fb1", 10e3, 200e3},      {"r_fb2", 80e3, 200e3},      {"c_out", 0.5e-6, 10e-6},  {"esr", 0.01, 1.0},
      {"c_c", 0.2e-12, 5e-12},     {"w_buf", 2e-6, 50e-6},      {"l_buf", 0.18e-6, 1e-6},  {"i_buf", 5e-6, 100e-6},
      {"c_ff", 0.1e-12, 10e-12},   {"w_sense", 1e-6, 20e-6},    {"l_sense", 0.18e-6, 2e-6}, {"i_q", 1e-6, 20e-6},
      {"v_ref", 0.5, 0.9},
  };
  SpecSet specs({target_min("area_um2", 3000.0), hard_max("psrr_db", 40.0), hard_max("gbw_hz", 100e3),
                 hard_max("pm_deg", 60.0), hard_min("power_w", 200e-6)});

  MetricFunction metrics = [](std::span<const double> x) {
    const double w_pass = x[0], l_pass = x[1], w_ea_in = x[2], l_ea_in = x[3], w_ea_load = x[4], l_ea_load = x[5];
    const double vov_ea = x[6] - kVth, i_ea = x[7], r_fb1 = x[8], r_fb2 = x[9], c_out = x[10], esr = x[11];
    const double c_c = x[12], w_buf = x[13], l_buf = x[14], i_buf = x[15], c_ff = x[16], w_sense = x[17];
    const double l_sense = x[18], i_q = x[19], v_ref = x[20];

    const double v_out = v_ref * (1.0 + r_fb1 / r_fb2);
    const double vds = std::max(kSupply - v_out, kMinHeadroom);
    const double r_load = v_out / kLoadCurrent;
    const double vov_pass = vov_from_current(w_pass, l_pass, kLoadCurrent);
    const double s = primitives::regime_indicator(vds - vov_pass, 0.0);

    const double beta = r_fb2 / (r_fb1 + r_fb2);
    const double gm_ea = gm_from_vov(w_ea_in, l_ea_in, vov_ea);
    const double r_ea = parallel(output_resistance(l_ea_in, 0.5 * i_ea), output_resistance(l_ea_load, 0.5 * i_ea));
    const double gm_buf = gm_from_current(w_buf, l_buf, i_buf);
    const double c_gate = kCox * w_pass * l_pass + c_c;
    const double gm_pass = kAlpha * kLoadCurrent / vov_pass;
    const double r_sat = parallel(output_resistance(l_pass, kLoadCurrent), r_load);
    const double gm_tri = kTriodeGmScale * gm_pass * vds / std::max(vov_pass, vds);
    const double r_on = vds / kLoadCurrent;
    const double r_tri = parallel(r_on, r_load);

    const double a_ea = gm_ea * r_ea;
    const double p_ea = 1.0 / (kTwoPi * r_ea * c_c * 10.0);
    const double p_gate = pole(gm_buf, c_gate);
    const double z_esr = 1.0 / (kTwoPi * esr * c_out);
    const double z_ff = 1.0 / (kTwoPi * r_fb1 * c_ff);

    const Regime sat{a_ea * gm_pass * r_sat * beta, {p_ea, 1.0 / (kTwoPi * r_sat * c_out), p_gate}, {z_esr, z_ff}};
    const Regime tri{a_ea * gm_tri * r_tri * beta, {p_ea, 1.0 / (kTwoPi * r_tri * c_out), 3.0 * p_gate}, {z_esr}};
    const Blend loop{sat, tri, s};

    const double loop_gain_db = loop.at(kPsrrFrequency).magnitude_db;
    const double psrr_db = std::max(20.0 * std::log10(1.0 + std::pow(10.0, loop_gain_db / 20.0)), kGainFloorDb);
    double gbw = primitives::kCrossoverLow;
    double pm = 180.0;
    if (loop.at(primitives::kCrossoverLow).magnitude_db > 0.0) {
      const auto cross = blended_crossover(loop);
      gbw = cross.frequency;
      pm = std::max(cross.phase_margin_deg, kPhaseMarginFloorDeg);
    }

    const double area_m2 = w_pass * l_pass + 2.0 * (w_ea_in * l_ea_in + w_ea_load * l_ea_load) + w_buf * l_buf +
                           w_sense * l_sense + (c_c + c_ff) / kCapDensity;
    const double power = kSupply * (i_ea + i_buf + 2.0 * i_q) +
                         kSupply * v_out / (r_fb1 + r_fb2);
    return std::vector<double>{area_m2 * 1e12, psrr_db, gbw, pm, power};
  };

  Testbench tb{"ldo-regime",
               "low-dropout regulator with saturation/triode pass device: minimize area subject to PSRR, GBW, "
               "phase margin and power",
               make_space(vars),
               names_of(vars),
               std::move(specs),
               std::move(metrics),
               Provenance::analytic,
               0,
               {}};
  tb.constants = {{"device", device_constants()},          {"supply", kSupply},
                  {"load_current", kLoadCurrent},          {"psrr_frequency", kPsrrFrequency},
                  {"cap_density", kCapDensity},            {"triode_gm_scale", kTriodeGmScale},
                  {"min_headroom", kMinHeadroom}};
  return tb;
}

}  // namespace cpn::bench

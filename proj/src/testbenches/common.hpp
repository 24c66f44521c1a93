#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "cpn/fom.hpp"
#include "cpn/primitives.hpp"
#include "cpn/testbench.hpp"

// Shared square-law-ish device model used by the registry testbenches.
namespace cpn::bench {

inline constexpr double kVth = 0.45;         // V
inline constexpr double kKp = 120e-6;        // A/V^alpha
inline constexpr double kAlpha = 1.3;        // short-channel power-law exponent
inline constexpr double kLambdaLength = 0.08e-6;  // m/V, ro = L / (lambdaL * I)
inline constexpr double kCox = 8e-3;         // F/m^2
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kGainFloorDb = 1.0;
inline constexpr double kPhaseMarginFloorDeg = 1.0;

struct Variable {
  std::string name;
  double lower;
  double upper;
};

inline DesignSpace make_space(const std::vector<Variable>& vars) {
  std::vector<double> lo;
  std::vector<double> hi;
  for (const auto& v : vars) {
    lo.push_back(v.lower);
    hi.push_back(v.upper);
  }
  return DesignSpace(lo, hi);
}

inline std::vector<std::string> names_of(const std::vector<Variable>& vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) out.push_back(v.name);
  return out;
}

/// Transconductance at a given overdrive: d/dvov of kp * power_law.
inline double gm_from_vov(double w, double l, double vov) {
  if (vov <= 0.0) return 0.0;
  return kAlpha * kKp * primitives::power_law(w, l, vov, kAlpha) / vov;
}

inline double drain_current(double w, double l, double vov) { return kKp * primitives::power_law(w, l, vov, kAlpha); }

inline double vov_from_current(double w, double l, double i) { return std::pow(i / (kKp * w / l), 1.0 / kAlpha); }

inline double gm_from_current(double w, double l, double i) { return kAlpha * i / vov_from_current(w, l, i); }

inline double output_resistance(double l, double i) { return l / (kLambdaLength * i); }

inline double parallel(double a, double b) { return a * b / (a + b); }

inline double gain_db(double gain) { return std::max(20.0 * std::log10(gain), kGainFloorDb); }

inline double pole(double g, double c) { return g / (kTwoPi * c); }

inline SpecItem hard_max(std::string name, double c) {
  return {std::move(name), Direction::maximize, c, SpecRole::hard_constraint};
}
inline SpecItem hard_min(std::string name, double c) {
  return {std::move(name), Direction::minimize, c, SpecRole::hard_constraint};
}
inline SpecItem target_max(std::string name, double c) {
  return {std::move(name), Direction::maximize, c, SpecRole::optimization_target};
}
inline SpecItem target_min(std::string name, double c) {
  return {std::move(name), Direction::minimize, c, SpecRole::optimization_target};
}

inline nlohmann::json device_constants() {
  return {{"vth", kVth},       {"kp", kKp},   {"alpha", kAlpha}, {"lambda_length", kLambdaLength},
          {"cox", kCox},       {"gain_floor_db", kGainFloorDb},   {"phase_margin_floor_deg", kPhaseMarginFloorDeg}};
}

Testbench make_ota2();
Testbench make_ota3();
Testbench make_bandgap();
Testbench make_gm_highdim();
Testbench make_ldo();
Testbench make_chargepump();

}  // namespace cpn::bench

#include "cpn/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cpn/error.hpp"

namespace cpn::primitives {

namespace {
constexpr double kBoltzmannOverCharge = 8.617333262e-5;  // V/K
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}  // namespace

double thermal_voltage(double kelvin) { return kBoltzmannOverCharge * kelvin; }

double exp_law(double v, double n, double vt) {
  if (!(n > 0.0) || !(vt > 0.0)) throw ContractError("exp_law: n and vt must be positive");
  return std::exp(std::min(v / (n * vt), kMaxExponent));
}

double power_law(double w, double l, double vov, double alpha) {
  if (!(w > 0.0) || !(l > 0.0)) throw ContractError("power_law: w and l must be positive");
  if (vov <= 0.0) return 0.0;
  return (w / l) * std::pow(vov, alpha);
}

Response rational_response(double f, double dc_gain, std::span<const double> poles, std::span<const double> zeros) {
  if (!(dc_gain > 0.0)) throw ContractError("rational_response: dc_gain must be positive");
  Response r;
  r.magnitude_db = 20.0 * std::log10(dc_gain);
  for (double z : zeros) {
    const double u = f / z;
    r.magnitude_db += 10.0 * std::log10(1.0 + u * u);
    r.phase_deg += std::atan(u) * kRadToDeg;
  }
  for (double p : poles) {
    const double u = f / p;
    r.magnitude_db -= 10.0 * std::log10(1.0 + u * u);
    r.phase_deg -= std::atan(u) * kRadToDeg;
  }
  return r;
}

Crossover unity_gain_crossover(double dc_gain, std::span<const double> poles, std::span<const double> zeros) {
  for (double p : poles) {
    if (!(p > 0.0)) throw ContractError("unity_gain_crossover: pole frequencies must be positive");
  }
  for (double z : zeros) {
    if (!(z > 0.0)) throw ContractError("unity_gain_crossover: zero frequencies must be positive");
  }
  auto mag = [&](double log_f) { return rational_response(std::pow(10.0, log_f), dc_gain, poles, zeros).magnitude_db; };
  double lo = std::log10(kCrossoverLow);
  double hi = std::log10(kCrossoverHigh);
  Crossover out;
  auto finish = [&](double log_f) {
    out.frequency = std::pow(10.0, log_f);
    out.phase_margin_deg = 180.0 + rational_response(out.frequency, dc_gain, poles, zeros).phase_deg;
    return out;
  };
  if (mag(lo) <= 0.0) return finish(lo);
  if (mag(hi) > 0.0) {
    out.bounded = false;
    return finish(hi);
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double m = mag(mid);
    if (std::abs(m) < 1e-6) break;
    if (m > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return finish(mid);
}

double regime_indicator(double v, double vth, double sharpness) {
  if (!(sharpness > 0.0)) throw ContractError("regime_indicator: sharpness must be positive");
  const double x = sharpness * (v - vth);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace cpn::primitives

#pragma once

#include <span>

// Device- and network-level building blocks that the synthetic testbenches are
// composed from: exponential and power-law device laws, low-order rational
// transfer responses, and logistic regime indicators.
namespace cpn::primitives {

/// Exponents above this are clamped.
inline constexpr double kMaxExponent = 40.0;
inline constexpr double kDefaultSharpness = 200.0;  // 1/V, ~10 mV transition
inline constexpr double kCrossoverLow = 1e-2;       // Hz
inline constexpr double kCrossoverHigh = 1e12;      // Hz

/// Boltzmann voltage kT/q at an absolute temperature in kelvin.
double thermal_voltage(double kelvin);

/// exp(v / (n vt)), exponent clamped at 40.
double exp_law(double v, double n, double vt);

/// (w / l) * max(vov, 0)^alpha.
double power_law(double w, double l, double vov, double alpha);

struct Response {
  double magnitude_db = 0.0;
  double phase_deg = 0.0;
};

/// Real-pole / real-zero transfer response at frequency f (all in hertz).
Response rational_response(double f, double dc_gain, std::span<const double> poles, std::span<const double> zeros);

struct Crossover {
  double frequency = 0.0;
  /// False when the magnitude stays above 0 dB up to kCrossoverHigh.
  bool bounded = true;
  double phase_margin_deg = 0.0;
};

/// 0 dB crossing of rational_response by bisection in log frequency over
/// [1e-2, 1e12] Hz, to |magnitude| < 1e-6 dB. A response already at or below
/// 0 dB at the low end crosses there.
Crossover unity_gain_crossover(double dc_gain, std::span<const double> poles, std::span<const double> zeros);

/// Logistic step 1 / (1 + exp(-sharpness (v - vth))).
double regime_indicator(double v, double vth, double sharpness = kDefaultSharpness);

}  // namespace cpn::primitives

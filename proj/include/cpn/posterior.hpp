#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cpn {

/// Default bin count for discrete posteriors.
inline constexpr std::size_t kDefaultBins = 100;
/// Default half-width, in standard deviations, of a discretized Gaussian.
inline constexpr double kDefaultSpanSigmas = 8.0;
/// Largest unit-sum deviation that is silently renormalized.
inline constexpr double kProbabilitySumTolerance = 1e-6;

/// Piecewise-constant predictive distribution: probability mass probs[k] at
/// value centers[k]. Centers are strictly ascending; probs sum to one.
class DiscretePosterior {
 public:
  /// Renormalizes probs when their sum is within kProbabilitySumTolerance of 1.
  /// Throws NormalizationError (bad sum, negative or non-finite mass) or
  /// OrderingError (centers not strictly ascending).
  DiscretePosterior(std::vector<double> centers, std::vector<double> probs);

  static DiscretePosterior point_mass(double value);

  std::span<const double> centers() const { return centers_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return centers_.size(); }

  /// Smallest center c with P(Y <= c) >= u; u in [0, 1).
  double quantile(double u) const;

  friend bool operator==(const DiscretePosterior&, const DiscretePosterior&) = default;

 private:
  std::vector<double> centers_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

struct GaussianPosterior {
  double mean = 0.0;
  double std = 0.0;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const DiscretePosterior& p);

double normal_pdf(double z);
double normal_cdf(double z);

/// Expected improvement of a Gaussian predictive distribution over f_star.
double closed_form_ei(const GaussianPosterior& g, double f_star);

/// Expected improvement under a discrete posterior: sum_k max(0, c_k - f_star) p_k.
double dei(const DiscretePosterior& p, double f_star);

/// K equal-width bins over mean +- span_sigmas * std, masses from the Gaussian
/// CDF with both tails folded into the end bins. Throws ContractError for std <= 0.
DiscretePosterior discretize_gaussian(const GaussianPosterior& g, std::size_t bins,
                                      double span_sigmas = kDefaultSpanSigmas);

/// Point mass at the mean for std == 0, otherwise discretize_gaussian.
DiscretePosterior to_discrete(const GaussianPosterior& g, std::size_t bins,
                              double span_sigmas = kDefaultSpanSigmas);

/// Mass at or above threshold.
double feasibility_mass(const DiscretePosterior& p, double threshold);

}  // namespace cpn

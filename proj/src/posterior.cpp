#include "cpn/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "cpn/error.hpp"

namespace cpn {

DiscretePosterior::DiscretePosterior(std::vector<double> centers, std::vector<double> probs)
    : centers_(std::move(centers)), probs_(std::move(probs)) {
  if (centers_.empty()) throw NormalizationError("DiscretePosterior: need at least one bin");
  if (centers_.size() != probs_.size()) {
    throw NormalizationError("DiscretePosterior: " + std::to_string(centers_.size()) + " centers but " +
                             std::to_string(probs_.size()) + " probabilities");
  }
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    if (!std::isfinite(centers_[k])) throw OrderingError("DiscretePosterior: non-finite center");
    if (k > 0 && !(centers_[k] > centers_[k - 1])) {
      throw OrderingError("DiscretePosterior: centers not strictly ascending at bin " + std::to_string(k));
    }
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) throw NormalizationError("DiscretePosterior: negative or non-finite mass");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw NormalizationError("DiscretePosterior: probabilities sum to " + std::to_string(sum));
  }
  for (double& p : probs_) p /= sum;
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
}

DiscretePosterior DiscretePosterior::point_mass(double value) { return DiscretePosterior({value}, {1.0}); }

double DiscretePosterior::quantile(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  auto k = static_cast<std::size_t>(it - cdf_.begin());
  // skip empty bins so a zero-mass center is never drawn
  while (k + 1 < probs_.size() && probs_[k] == 0.0) ++k;
  return centers_[k];
}

Moments moments(const DiscretePosterior& p) {
  const auto c = p.centers();
  const auto w = p.probs();
  double mean = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) mean += c[k] * w[k];
  double var = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double d = c[k] - mean;
    var += d * d * w[k];
  }
  return {mean, std::max(var, 0.0)};
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double closed_form_ei(const GaussianPosterior& g, double f_star) {
  const double delta = g.mean - f_star;
  if (!(g.std > 0.0)) return std::max(0.0, delta);
  const double z = delta / g.std;
  return std::max(0.0, delta * normal_cdf(z) + g.std * normal_pdf(z));
}

double dei(const DiscretePosterior& p, double f_star) {
  const auto c = p.centers();
  const auto w = p.probs();
  // centers ascending: skip straight to the first improving bin
  auto first = std::upper_bound(c.begin(), c.end(), f_star) - c.begin();
  double sum = 0.0;
  for (auto k = static_cast<std::size_t>(first); k < c.size(); ++k) sum += (c[k] - f_star) * w[k];
  return sum;
}

namespace {

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// P(a < Z <= b) for standard normal Z, evaluated on the side that avoids cancellation.
double standard_mass(double a, double b) {
  if (a >= 0.0) return upper_tail(a) - upper_tail(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return 1.0 - normal_cdf(a) - upper_tail(b);
}

}  // namespace

DiscretePosterior discretize_gaussian(const GaussianPosterior& g, std::size_t bins, double span_sigmas) {
  if (bins == 0) throw ContractError("discretize_gaussian: need at least one bin");
  if (!(span_sigmas > 0.0)) throw ContractError("discretize_gaussian: span_sigmas must be positive");
  if (!(g.std > 0.0)) throw ContractError("discretize_gaussian: std must be positive (use a point mass)");
  const auto k_count = static_cast<double>(bins);
  const double width = 2.0 * span_sigmas / k_count;  // in standard deviations
  std::vector<double> centers(bins);
  std::vector<double> probs(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double lo = -span_sigmas + width * static_cast<double>(k);
    const double hi = (k + 1 == bins) ? span_sigmas : lo + width;
    centers[k] = g.mean + g.std * 0.5 * (lo + hi);
    const double a = (k == 0) ? -INFINITY : lo;
    const double b = (k + 1 == bins) ? INFINITY : hi;
    probs[k] = standard_mass(a, b);
  }
  if (bins == 1) centers[0] = g.mean;
  for (std::size_t k = 1; k < bins; ++k) {
    if (!(centers[k] > centers[k - 1])) {
      throw ContractError("discretize_gaussian: std too small relative to mean for " + std::to_string(bins) +
                          " distinct bins");
    }
  }
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= sum;
  return DiscretePosterior(std::move(centers), std::move(probs));
}

DiscretePosterior to_discrete(const GaussianPosterior& g, std::size_t bins, double span_sigmas) {
  if (!(g.std > 0.0)) return DiscretePosterior::point_mass(g.mean);
  // Bins narrower than a few ulps of the mean cannot stay strictly ascending.
  const double bin_width = 2.0 * span_sigmas * g.std / static_cast<double>(std::max<std::size_t>(bins, 1));
  if (bin_width <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(g.mean))) {
    return DiscretePosterior::point_mass(g.mean);
  }
  return discretize_gaussian(g, bins, span_sigmas);
}

double feasibility_mass(const DiscretePosterior& p, double threshold) {
  const auto c = p.centers();
  const auto w = p.probs();
  auto first = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), threshold) - c.begin());
  double mass = 0.0;
  for (std::size_t k = first; k < c.size(); ++k) mass += w[k];
  return std::min(mass, 1.0);
}

}  // namespace cpn

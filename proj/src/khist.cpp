#include "cpn/khist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpn/error.hpp"

namespace cpn {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

double median_pairwise_distance(const std::vector<std::vector<double>>& x) {
  std::vector<double> d;
  d.reserve(x.size() * (x.size() - 1) / 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = i + 1; k < x.size(); ++k) d.push_back(std::sqrt(squared_distance(x[i], x[k])));
  }
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double median = *mid;
  if (d.size() % 2 == 0) median = 0.5 * (median + *std::max_element(d.begin(), mid));
  return median;
}

}  // namespace

KhistBackend::KhistBackend(KhistOptions options) : options_(options) {
  if (options_.bins == 0) throw ContractError("khist: need at least one bin");
  if (options_.bandwidth && !(*options_.bandwidth > 0.0)) throw ContractError("khist: bandwidth must be positive");
}

void KhistBackend::set_context(const Dataset& context) {
  if (context.size() < 2) throw ContractError("khist: context needs at least 2 observations");
  if (context.x.size() != context.y.size()) throw ContractError("khist: context x and y differ in length");
  context_ = context;

  bandwidth_ = options_.bandwidth.value_or(median_pairwise_distance(context_.x));
  if (!(bandwidth_ > 0.0)) bandwidth_ = 1.0;

  const auto [lo_it, hi_it] = std::minmax_element(context_.y.begin(), context_.y.end());
  const double range = *hi_it - *lo_it;
  const double margin = range > 0.0 ? kKhistMarginFraction * range : 1.0;
  const double lo = *lo_it - margin;
  const double hi = *hi_it + margin;
  const std::size_t k_count = options_.bins;
  const double width = (hi - lo) / static_cast<double>(k_count);

  centers_.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) centers_[k] = lo + width * (static_cast<double>(k) + 0.5);
  bin_of_.resize(context_.size());
  for (std::size_t i = 0; i < context_.size(); ++i) {
    const double pos = std::floor((context_.y[i] - lo) / width);
    bin_of_[i] = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(k_count - 1)));
  }
}

std::vector<DiscretePosterior> KhistBackend::predict_batch(std::span<const Query> queries) const {
  if (centers_.empty()) throw ContractError("khist: predict_batch before set_context");
  const std::size_t k_count = centers_.size();
  const double alpha = kKhistSmoothingTotal / static_cast<double>(k_count);
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth_ * bandwidth_);

  std::vector<DiscretePosterior> out;
  out.reserve(queries.size());
  std::vector<double> log_w(context_.size());
  std::vector<double> mass(k_count);
  for (const auto& q : queries) {
    if (q.size() != context_.x.front().size()) throw ContractError("khist: query dimension mismatch");
    // log-domain weights keep distant queries well defined
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < context_.size(); ++i) {
      log_w[i] = -squared_distance(q, context_.x[i]) * inv_two_h2;
      max_log = std::max(max_log, log_w[i]);
    }
    double total = 0.0;
    std::fill(mass.begin(), mass.end(), 0.0);
    for (std::size_t i = 0; i < context_.size(); ++i) {
      const double w = std::exp(log_w[i] - max_log);
      mass[bin_of_[i]] += w;
      total += w;
    }
    double sum = 0.0;
    for (double& m : mass) {
      m = m / total + alpha;
      sum += m;
    }
    std::vector<double> probs(k_count);
    for (std::size_t k = 0; k < k_count; ++k) probs[k] = mass[k] / sum;
    out.emplace_back(centers_, std::move(probs));
  }
  return out;
}

std::vector<DiscretePosterior> khist_predict(const Dataset& context, std::span<const Query> queries,
                                             const KhistOptions& options) {
  KhistBackend backend(options);
  backend.set_context(context);
  return backend.predict_batch(queries);
}

}  // namespace cpn

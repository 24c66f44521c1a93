#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpn/surrogate.hpp"

namespace cpn {

struct KhistOptions {
  std::size_t bins = kDefaultBins;
  /// Fixed RBF bandwidth in normalized input units; empty selects the median
  /// pairwise distance of the context inputs.
  std::optional<double> bandwidth;
};

inline constexpr double kKhistMarginFraction = 0.05;
inline constexpr double kKhistSmoothingTotal = 1e-3;

/// Kernel-weighted histogram of context outputs. Each query's posterior is the
/// histogram of context y values weighted by an RBF kernel on input distance,
/// normalized, plus a uniform Laplace term of total mass 1e-3. Produces skewed
/// and multimodal posteriors that a Gaussian cannot represent.
class KhistBackend : public SurrogateBackend {
 public:
  explicit KhistBackend(KhistOptions options = {});

  std::string name() const override { return "khist"; }
  void set_context(const Dataset& context) override;
  std::vector<DiscretePosterior> predict_batch(std::span<const Query> queries) const override;

  double bandwidth() const { return bandwidth_; }
  std::span<const double> centers() const { return centers_; }

 private:
  KhistOptions options_;
  Dataset context_;
  std::vector<std::size_t> bin_of_;
  std::vector<double> centers_;
  double bandwidth_ = 1.0;
};

/// Convenience wrapper: set_context + predict_batch on a fresh backend.
std::vector<DiscretePosterior> khist_predict(const Dataset& context, std::span<const Query> queries,
                                             const KhistOptions& options = {});

}  // namespace cpn

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cpn/posterior.hpp"
#include "cpn/sampling.hpp"

namespace cpn {

using Query = std::vector<double>;

/// Context in, discrete posteriors out. Inputs handed to a backend are already
/// normalized to [0,1]^D; outputs are raw and any standardization is undone
/// before posteriors leave the backend.
///
/// Predictions depend only on the most recent context and the queries.
class SurrogateBackend {
 public:
  virtual ~SurrogateBackend() = default;

  virtual std::string name() const = 0;
  virtual void set_context(const Dataset& context) = 0;
  virtual std::vector<DiscretePosterior> predict_batch(std::span<const Query> queries) const = 0;
};

/// Output standardization of a context.
struct NormalizationState {
  double y_mean = 0.0;
  double y_std = 1.0;

  /// Falls back to std = 1 when all outputs are equal.
  static NormalizationState fit(std::span<const double> y);

  double standardize(double y) const { return (y - y_mean) / y_std; }
  double restore(double z) const { return y_mean + y_std * z; }
};

enum class BackendKind { gp_rbf, gp_matern, gp_linear, khist, external };

BackendKind parse_backend_kind(const std::string& text);
std::string to_string(BackendKind kind);

struct BackendOptions {
  BackendKind kind = BackendKind::khist;
  std::size_t bins = kDefaultBins;
  std::uint64_t seed = 0;
  /// Command line of the external backend process.
  std::string command;
};

std::unique_ptr<SurrogateBackend> make_backend(const BackendOptions& options);

}  // namespace cpn

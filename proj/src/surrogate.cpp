#include "cpn/surrogate.hpp"

#include <cmath>

#include "cpn/error.hpp"
#include "cpn/external_backend.hpp"
#include "cpn/gp.hpp"
#include "cpn/khist.hpp"

namespace cpn {

NormalizationState NormalizationState::fit(std::span<const double> y) {
  NormalizationState s;
  if (y.empty()) return s;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  s.y_mean = mean;
  const double sd = std::sqrt(var);
  s.y_std = (sd > 1e-12 * std::max(1.0, std::abs(mean))) ? sd : 1.0;
  return s;
}

BackendKind parse_backend_kind(const std::string& text) {
  if (text == "gp_rbf") return BackendKind::gp_rbf;
  if (text == "gp_matern") return BackendKind::gp_matern;
  if (text == "gp_linear") return BackendKind::gp_linear;
  if (text == "khist") return BackendKind::khist;
  if (text == "external") return BackendKind::external;
  throw ConfigError("unknown backend '" + text + "' (gp_rbf, gp_matern, gp_linear, khist, external)");
}

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::gp_rbf: return "gp_rbf";
    case BackendKind::gp_matern: return "gp_matern";
    case BackendKind::gp_linear: return "gp_linear";
    case BackendKind::khist: return "khist";
    case BackendKind::external: return "external";
  }
  return "unknown";
}

std::unique_ptr<SurrogateBackend> make_backend(const BackendOptions& options) {
  switch (options.kind) {
    case BackendKind::gp_rbf: return std::make_unique<GpBackend>(KernelKind::rbf, options.bins, options.seed);
    case BackendKind::gp_matern: return std::make_unique<GpBackend>(KernelKind::matern52, options.bins, options.seed);
    case BackendKind::gp_linear: return std::make_unique<GpBackend>(KernelKind::linear, options.bins, options.seed);
    case BackendKind::khist: return std::make_unique<KhistBackend>(KhistOptions{options.bins, std::nullopt});
    case BackendKind::external:
      if (options.command.empty()) throw ConfigError("external backend needs a command line");
      return std::make_unique<ExternalBackend>(std::make_shared<ExternalConnection>(options.command), options.bins);
  }
  throw ConfigError("unknown backend kind");
}

}  // namespace cpn

#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpn/subprocess.hpp"
#include "cpn/surrogate.hpp"

namespace cpn {

inline constexpr int kWireProtocolVersion = 1;

/// JSON-lines link to an external backend process. Performs the handshake on
/// construction; one request is in flight at a time.
class ExternalConnection {
 public:
  explicit ExternalConnection(const std::string& command,
                              std::chrono::milliseconds timeout = std::chrono::seconds(600));

  const std::string& backend_name() const { return backend_name_; }
  std::size_t max_context() const { return max_context_; }

  /// Sends one frame and returns the raw reply line.
  std::string request(const nlohmann::json& frame);

 private:
  Subprocess process_;
  std::chrono::milliseconds timeout_;
  std::mutex mutex_;
  std::string backend_name_;
  std::size_t max_context_ = 0;
};

nlohmann::json make_predict_frame(const Dataset& context, std::span<const Query> queries, std::size_t bins);

/// Parses a posterior reply. Throws ProtocolError for malformed frames and
/// error frames, NormalizationError / OrderingError for invalid posteriors.
std::vector<DiscretePosterior> parse_posterior_frame(const std::string& line, std::size_t expected_queries);

std::vector<DiscretePosterior> external_predict(ExternalConnection& connection, const Dataset& context,
                                                std::span<const Query> queries, std::size_t bins);

class ExternalBackend : public SurrogateBackend {
 public:
  ExternalBackend(std::shared_ptr<ExternalConnection> connection, std::size_t bins = kDefaultBins);

  std::string name() const override { return "external:" + connection_->backend_name(); }
  /// Throws ContextLimitError when the context exceeds the backend's max_context.
  void set_context(const Dataset& context) override;
  std::vector<DiscretePosterior> predict_batch(std::span<const Query> queries) const override;

 private:
  std::shared_ptr<ExternalConnection> connection_;
  std::size_t bins_;
  Dataset context_;
};

}  // namespace cpn

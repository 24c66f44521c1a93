#include "cpn/external_backend.hpp"

#include <cmath>

#include "cpn/error.hpp"
#include "cpn/log.hpp"

namespace cpn {

using nlohmann::json;

namespace {

json parse_frame(const std::string& line) {
  json frame;
  try {
    frame = json::parse(line);
  } catch (const json::exception& e) {
    log::error("external backend sent an unparseable frame: " + line);
    throw ProtocolError(std::string("malformed frame: ") + e.what());
  }
  if (!frame.is_object() || !frame.contains("op") || !frame["op"].is_string()) {
    log::error("external backend frame without op: " + line);
    throw ProtocolError("malformed frame: missing op");
  }
  if (frame["op"] == "error") {
    const std::string message = frame.value("message", std::string("(no message)"));
    log::error("external backend error frame: " + line);
    throw ProtocolError("backend error: " + message);
  }
  return frame;
}

}  // namespace

ExternalConnection::ExternalConnection(const std::string& command, std::chrono::milliseconds timeout)
    : process_(command), timeout_(timeout) {
  const std::string reply = request(json{{"op", "handshake"}, {"version", kWireProtocolVersion}});
  const json frame = parse_frame(reply);
  if (frame["op"] != "handshake_ok") {
    log::error("unexpected handshake reply: " + reply);
    throw ProtocolError("handshake: expected handshake_ok");
  }
  try {
    backend_name_ = frame.at("backend").get<std::string>();
    const auto max_context = frame.at("max_context").get<long long>();
    if (max_context <= 0) throw ProtocolError("handshake: max_context must be positive");
    max_context_ = static_cast<std::size_t>(max_context);
  } catch (const json::exception& e) {
    log::error("malformed handshake reply: " + reply);
    throw ProtocolError(std::string("handshake: ") + e.what());
  }
}

std::string ExternalConnection::request(const json& frame) {
  std::lock_guard lock(mutex_);
  process_.write_line(frame.dump());
  auto line = process_.read_line(timeout_);
  if (!line) throw TransportError("external backend '" + process_.command() + "' closed its output");
  return *line;
}

json make_predict_frame(const Dataset& context, std::span<const Query> queries, std::size_t bins) {
  return json{{"op", "predict"},
              {"context_x", context.x},
              {"context_y", context.y},
              {"query_x", std::vector<Query>(queries.begin(), queries.end())},
              {"num_bins", bins}};
}

std::vector<DiscretePosterior> parse_posterior_frame(const std::string& line, std::size_t expected_queries) {
  const json frame = parse_frame(line);
  if (frame["op"] != "posterior") {
    log::error("expected a posterior frame: " + line);
    throw ProtocolError("expected op 'posterior'");
  }
  std::vector<std::vector<double>> centers;
  std::vector<std::vector<double>> probs;
  try {
    centers = frame.at("centers").get<std::vector<std::vector<double>>>();
    probs = frame.at("probs").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    log::error("malformed posterior frame: " + line);
    throw ProtocolError(std::string("malformed posterior frame: ") + e.what());
  }
  if (centers.size() != expected_queries || probs.size() != expected_queries) {
    log::error("posterior frame with wrong query count: " + line);
    throw ProtocolError("posterior frame answers " + std::to_string(centers.size()) + " queries, expected " +
                        std::to_string(expected_queries));
  }
  std::vector<DiscretePosterior> out;
  out.reserve(expected_queries);
  for (std::size_t q = 0; q < expected_queries; ++q) {
    try {
      out.emplace_back(std::move(centers[q]), std::move(probs[q]));
    } catch (const InvalidPosterior&) {
      log::error("invalid posterior for query " + std::to_string(q) + " in frame: " + line);
      throw;
    }
  }
  return out;
}

std::vector<DiscretePosterior> external_predict(ExternalConnection& connection, const Dataset& context,
                                                std::span<const Query> queries, std::size_t bins) {
  if (context.size() > connection.max_context()) {
    throw ContextLimitError("context of " + std::to_string(context.size()) + " exceeds backend max_context " +
                            std::to_string(connection.max_context()));
  }
  if (queries.empty()) return {};
  return parse_posterior_frame(connection.request(make_predict_frame(context, queries, bins)), queries.size());
}

ExternalBackend::ExternalBackend(std::shared_ptr<ExternalConnection> connection, std::size_t bins)
    : connection_(std::move(connection)), bins_(bins) {
  if (!connection_) throw ContractError("ExternalBackend: null connection");
}

void ExternalBackend::set_context(const Dataset& context) {
  if (context.size() > connection_->max_context()) {
    throw ContextLimitError("context of " + std::to_string(context.size()) + " exceeds backend max_context " +
                            std::to_string(connection_->max_context()));
  }
  context_ = context;
}

std::vector<DiscretePosterior> ExternalBackend::predict_batch(std::span<const Query> queries) const {
  return external_predict(*connection_, context_, queries, bins_);
}

}  // namespace cpn

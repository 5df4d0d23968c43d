#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "llmrank/errors.hpp"
#include "llmrank/judge.hpp"

namespace llmrank {

using json = nlohmann::json;

namespace {

struct EndpointParts {
  std::string base;  // scheme://authority
  std::string path;  // leading '/'
};

EndpointParts split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("judge endpoint must include a scheme: " + endpoint);
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

// Walks a dot-separated path through a JSON document; numeric segments index
// arrays.
const json* walk_path(const json& root, const std::string& path) {
  const json* node = &root;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    std::size_t dot = path.find('.', pos);
    std::string segment = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (segment.empty()) return nullptr;
    if (node->is_array()) {
      char* end = nullptr;
      long idx = std::strtol(segment.c_str(), &end, 10);
      if (end == segment.c_str() || *end != '\0') return nullptr;
      if (idx < 0 || static_cast<std::size_t>(idx) >= node->size()) return nullptr;
      node = &(*node)[static_cast<std::size_t>(idx)];
    } else if (node->is_object()) {
      auto it = node->find(segment);
      if (it == node->end()) return nullptr;
      node = &*it;
    } else {
      return nullptr;
    }
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return node;
}

bool is_timeout_error(httplib::Error error) {
  return error == httplib::Error::ConnectionTimeout || error == httplib::Error::Read ||
         error == httplib::Error::Write;
}

}  // namespace

std::string http_judge(const std::string& system_prompt, const std::string& user_prompt,
                       const HttpJudgeConfig& config) {
  if (config.endpoint.empty()) throw ConfigError("http judge needs an endpoint");
  if (config.model.empty()) throw ConfigError("http judge needs a model name");

  auto parts = split_endpoint(config.endpoint);
  httplib::Client client(parts.base);
  time_t secs = config.timeout_ms / 1000;
  time_t usecs = (config.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!config.credential_env.empty()) {
    const char* credential = std::getenv(config.credential_env.c_str());
    if (!credential)
      throw ConfigError("environment variable " + config.credential_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + credential);
  }

  json body = {
      {"model", config.model},
      {"messages",
       json::array({{{"role", "system"}, {"content", system_prompt}},
                    {{"role", "user"}, {"content", user_prompt}}})},
      {"temperature", 0},
  };

  auto result = client.Post(parts.path, headers, body.dump(), "application/json");
  if (!result) {
    auto kind = is_timeout_error(result.error()) ? TransportError::Kind::timeout
                                                 : TransportError::Kind::network;
    throw TransportError(kind, "http judge call failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300)
    throw TransportError(TransportError::Kind::status,
                         "http judge returned status " + std::to_string(result->status),
                         result->status);

  json response = json::parse(result->body, nullptr, false);
  if (response.is_discarded())
    throw TransportError(TransportError::Kind::protocol, "http judge response body is not JSON");
  const json* node = walk_path(response, config.response_path);
  if (!node || !node->is_string())
    throw TransportError(TransportError::Kind::protocol,
                         "no text at response path " + config.response_path);
  return node->get<std::string>();
}

HttpBackend::HttpBackend(HttpJudgeConfig config)
    : config_(std::move(config)), limiter_(config_.max_in_flight) {
  if (config_.endpoint.empty()) throw ConfigError("http backend needs an endpoint");
  if (config_.model.empty()) throw ConfigError("http backend needs a model name");
  if (!config_.credential_env.empty() && !std::getenv(config_.credential_env.c_str()))
    throw ConfigError("environment variable " + config_.credential_env + " is not set");
}

std::string HttpBackend::do_complete(const JudgeRequest& request) {
  ConcurrencyLimiter::Guard guard(limiter_);
  return http_judge(request.system_prompt, request.user_prompt, config_);
}

}  // namespace llmrank

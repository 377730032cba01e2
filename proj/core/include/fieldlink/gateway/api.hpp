#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fieldlink/common/actor.hpp"
#include "fieldlink/common/error.hpp"
#include "fieldlink/gateway/authz.hpp"
#include "fieldlink/gateway/platform.hpp"

namespace fieldlink::gateway {

inline constexpr std::string_view kApiPrefix = "/api/v1";

struct ApiRequest {
  std::string method;
  std::string path;  // decoded, without the query string
  std::map<std::string, std::string> query;
  std::string authorization;  // raw Authorization header
  std::string content_type;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Splits "path?query" and percent-decodes both parts.
void parse_target(std::string_view target, std::string& path, std::map<std::string, std::string>& query);
std::string percent_decode(std::string_view s);

/// Token from "Bearer <token>", or empty.
std::string bearer_token(std::string_view authorization);

/// HTTP status for a domain error code.
int http_status(Errc code) noexcept;

// Transport-independent request router for everything under /api/v1.
//
// Each handler authenticates the caller, checks the role matrix, and only
// then touches state. Errors come back as
// {"error": {"code", "message", "details"}} with a mapped status.
class Api {
 public:
  explicit Api(Platform& platform);
  ~Api();

  ApiResponse handle(const ApiRequest& request);

  /// Resolves a session token and applies the per-session request cap.
  /// Throws Unauthenticated / Forbidden.
  Actor authenticate(std::string_view token, Endpoint endpoint);

  Platform& platform() noexcept { return platform_; }

 private:
  struct Route;
  ApiResponse dispatch(const ApiRequest& request);

  Platform& platform_;
  std::vector<Route> routes_;
  std::mutex usage_mu_;
  std::unordered_map<std::string, std::uint64_t> requests_per_session_;
};

}  // namespace fieldlink::gateway

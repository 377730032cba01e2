#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace fieldlink::gateway {

// Server settings. On disk: one flat JSON object whose keys are the field
// names below. Each key can be overridden by an environment variable named
// AGRO_<KEY IN UPPER CASE>, e.g. AGRO_PORT=9000.
struct ServerConfig {
  std::string listen_address = "127.0.0.1";
  std::uint16_t port = 8080;
  std::filesystem::path data_dir = "data";
  std::optional<std::filesystem::path> model_path;
  unsigned http_threads = 2;
  unsigned worker_threads = 1;
  std::chrono::milliseconds sweep_interval{1000};
  std::chrono::milliseconds retry_interval{30000};
  double loess_span = 0.75;
  int loess_degree = 2;
  std::uint64_t session_request_cap = 100000;
  std::string password_hashing = "interactive";  // or "minimal"
  bool sync_writes = false;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Applies `doc` then environment overrides to the defaults. Throws
/// InvalidArgument for unknown keys or values of the wrong type.
ServerConfig config_from_json(const nlohmann::json& doc, const EnvLookup& env = process_env);
/// Throws IoError when the file cannot be read, FormatError when it is not
/// a JSON object.
ServerConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

nlohmann::json to_json(const ServerConfig& c);

}  // namespace fieldlink::gateway

#include "fieldlink/gateway/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include "fieldlink/common/error.hpp"

namespace fieldlink::gateway {

using nlohmann::json;

namespace {

const char* const kKeys[] = {"listen_address", "port",           "data_dir",         "model_path",
                             "http_threads",   "worker_threads", "sweep_interval_ms", "retry_interval_ms",
                             "loess_span",     "loess_degree",   "session_request_cap", "password_hashing",
                             "sync_writes"};

std::string env_name(std::string_view key) {
  std::string out = "AGRO_";
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

// Environment values are strings; coerce them to the type the key expects.
json env_value(std::string_view key, const std::string& raw) {
  static const char* const string_keys[] = {"listen_address", "data_dir", "model_path", "password_hashing"};
  if (std::find(std::begin(string_keys), std::end(string_keys), key) != std::end(string_keys)) return raw;
  if (key == "sync_writes") {
    if (raw == "1" || raw == "true") return true;
    if (raw == "0" || raw == "false") return false;
    throw Error(Errc::invalid_argument, env_name(key) + " must be true/false");
  }
  const auto parsed = json::parse(raw, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_number()) {
    throw Error(Errc::invalid_argument, env_name(key) + " must be a number, got '" + raw + "'");
  }
  return parsed;
}

template <class T>
T number(const json& v, std::string_view key) {
  if (!v.is_number()) throw Error(Errc::invalid_argument, "config key '" + std::string(key) + "' must be a number");
  return v.get<T>();
}

std::string text(const json& v, std::string_view key) {
  if (!v.is_string()) throw Error(Errc::invalid_argument, "config key '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

ServerConfig config_from_json(const json& doc, const EnvLookup& env) {
  if (!doc.is_object()) throw Error(Errc::format_error, "config must be a JSON object");
  json merged = doc;
  for (const auto& [key, _] : doc.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw Error(Errc::invalid_argument, "unknown config key '" + key + "'");
    }
  }
  for (const char* key : kKeys) {
    if (auto raw = env(env_name(key))) merged[key] = env_value(key, *raw);
  }

  ServerConfig c;
  for (const auto& [key, v] : merged.items()) {
    if (key == "listen_address") c.listen_address = text(v, key);
    else if (key == "port") c.port = number<std::uint16_t>(v, key);
    else if (key == "data_dir") c.data_dir = text(v, key);
    else if (key == "model_path") c.model_path = v.is_null() ? std::nullopt : std::optional<std::filesystem::path>(text(v, key));
    else if (key == "http_threads") c.http_threads = std::max(1u, number<unsigned>(v, key));
    else if (key == "worker_threads") c.worker_threads = std::max(1u, number<unsigned>(v, key));
    else if (key == "sweep_interval_ms") c.sweep_interval = std::chrono::milliseconds(number<std::int64_t>(v, key));
    else if (key == "retry_interval_ms") c.retry_interval = std::chrono::milliseconds(number<std::int64_t>(v, key));
    else if (key == "loess_span") c.loess_span = number<double>(v, key);
    else if (key == "loess_degree") c.loess_degree = number<int>(v, key);
    else if (key == "session_request_cap") c.session_request_cap = number<std::uint64_t>(v, key);
    else if (key == "password_hashing") c.password_hashing = text(v, key);
    else if (key == "sync_writes") {
      if (!v.is_boolean()) throw Error(Errc::invalid_argument, "config key 'sync_writes' must be a boolean");
      c.sync_writes = v.get<bool>();
    }
  }
  if (c.password_hashing != "interactive" && c.password_hashing != "minimal") {
    throw Error(Errc::invalid_argument, "password_hashing must be 'interactive' or 'minimal'");
  }
  if (c.sweep_interval.count() <= 0) throw Error(Errc::invalid_argument, "sweep_interval_ms must be positive");
  return c;
}

ServerConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read config " + path.string());
  const auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::format_error, "config " + path.string() + " is not valid JSON");
  return config_from_json(doc, env);
}

json to_json(const ServerConfig& c) {
  return {{"listen_address", c.listen_address},
          {"port", c.port},
          {"data_dir", c.data_dir.string()},
          {"model_path", c.model_path ? json(c.model_path->string()) : json()},
          {"http_threads", c.http_threads},
          {"worker_threads", c.worker_threads},
          {"sweep_interval_ms", c.sweep_interval.count()},
          {"retry_interval_ms", c.retry_interval.count()},
          {"loess_span", c.loess_span},
          {"loess_degree", c.loess_degree},
          {"session_request_cap", c.session_request_cap},
          {"password_hashing", c.password_hashing},
          {"sync_writes", c.sync_writes}};
}

}  // namespace fieldlink::gateway

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fieldlink {

using Bytes = std::vector<std::uint8_t>;

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::span<const std::uint8_t> data);

/// `n` bytes from the OS CSPRNG, hex encoded (2n characters).
std::string random_hex(std::size_t n);

/// Opaque identifier of the form `<prefix>_<16 hex>`.
std::string new_id(std::string_view prefix);

std::string base64_encode(std::span<const std::uint8_t> data);
/// Throws Error(invalid_argument) on malformed input.
Bytes base64_decode(std::string_view text);

struct PasswordHashParams {
  std::uint64_t ops_limit;
  std::size_t mem_limit;

  // Argon2id interactive profile; the server default.
  static PasswordHashParams interactive();
  // Smallest parameters libsodium accepts; fixtures and tests only.
  static PasswordHashParams minimal();
};

/// Memory-hard salted hash in the self-describing PHC string form.
std::string hash_password(std::string_view secret, const PasswordHashParams& params);
/// Constant-time verification against a string produced by hash_password.
bool verify_password(std::string_view encoded, std::string_view secret);

}  // namespace fieldlink

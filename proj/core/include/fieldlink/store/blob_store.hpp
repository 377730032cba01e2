#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fieldlink::store {

// Content-addressed files named by the hex SHA-256 of their bytes.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path dir);

  /// Idempotent; returns the digest.
  std::string put(std::span<const std::uint8_t> bytes);
  /// Throws Error(not_found); Error(invalid_argument) for a malformed digest.
  std::vector<std::uint8_t> get(const std::string& digest) const;
  bool contains(const std::string& digest) const;

 private:
  std::filesystem::path path_for(const std::string& digest) const;

  std::filesystem::path dir_;
};

bool is_hex_digest(std::string_view s) noexcept;

}  // namespace fieldlink::store

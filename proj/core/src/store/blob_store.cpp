#include "fieldlink/store/blob_store.hpp"

#include <fstream>
#include <iterator>
#include <system_error>

#include "fieldlink/common/crypto.hpp"
#include "fieldlink/common/error.hpp"

namespace fieldlink::store {

namespace fs = std::filesystem;

bool is_hex_digest(std::string_view s) noexcept {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

BlobStore::BlobStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path BlobStore::path_for(const std::string& digest) const {
  if (!is_hex_digest(digest)) throw Error(Errc::invalid_argument, "malformed blob digest");
  return dir_ / digest;
}

std::string BlobStore::put(std::span<const std::uint8_t> bytes) {
  const auto digest = sha256_hex(bytes);
  const auto target = path_for(digest);
  if (fs::exists(target)) return digest;
  // Unique temp name, then an atomic rename; concurrent writers of the same
  // bytes race harmlessly.
  const auto tmp = dir_ / (digest + ".tmp-" + random_hex(6));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io_error, "cannot write blob " + digest);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    if (!fs::exists(target)) throw Error(Errc::io_error, "cannot commit blob " + digest);
  }
  return digest;
}

std::vector<std::uint8_t> BlobStore::get(const std::string& digest) const {
  std::ifstream in(path_for(digest), std::ios::binary);
  if (!in) throw Error(Errc::not_found, "no blob " + digest);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool BlobStore::contains(const std::string& digest) const {
  return is_hex_digest(digest) && fs::exists(dir_ / digest);
}

}  // namespace fieldlink::store

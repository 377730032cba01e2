#include "fieldlink/common/crypto.hpp"

#include <mutex>

#include <sodium.h>

#include "fieldlink/common/error.hpp"

namespace fieldlink {
namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw Error(Errc::io_error, "libsodium initialisation failed");
  });
}

std::string to_hex(const unsigned char* data, std::size_t n) {
  std::string out(n * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), data, n);
  out.pop_back();
  return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> data) {
  ensure_sodium();
  unsigned char digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, data.data(), data.size());
  return to_hex(digest, sizeof digest);
}

std::string random_hex(std::size_t n) {
  ensure_sodium();
  std::vector<unsigned char> buf(n);
  randombytes_buf(buf.data(), buf.size());
  return to_hex(buf.data(), buf.size());
}

std::string new_id(std::string_view prefix) {
  std::string id(prefix);
  id += '_';
  id += random_hex(8);
  return id;
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  ensure_sodium();
  const auto variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_encoded_len(data.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), data.data(), data.size(), variant);
  out.resize(out.size() - 1);
  return out;
}

Bytes base64_decode(std::string_view text) {
  ensure_sodium();
  Bytes out(text.size() / 4 * 3 + 3);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), "\r\n ", &len, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != text.data() + text.size()) {
    throw Error(Errc::invalid_argument, "malformed base64 payload");
  }
  out.resize(len);
  return out;
}

PasswordHashParams PasswordHashParams::interactive() {
  return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE};
}

PasswordHashParams PasswordHashParams::minimal() {
  return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN};
}

std::string hash_password(std::string_view secret, const PasswordHashParams& params) {
  ensure_sodium();
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str_alg(out, secret.data(), secret.size(), params.ops_limit, params.mem_limit,
                            crypto_pwhash_ALG_ARGON2ID13) != 0) {
    throw Error(Errc::io_error, "password hashing ran out of memory");
  }
  return out;
}

bool verify_password(std::string_view encoded, std::string_view secret) {
  ensure_sodium();
  std::string stored(encoded);
  return crypto_pwhash_str_verify(stored.c_str(), secret.data(), secret.size()) == 0;
}

}  // namespace fieldlink

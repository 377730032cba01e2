#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldlink/common/actor.hpp"
#include "fieldlink/common/clock.hpp"
#include "fieldlink/common/crypto.hpp"
#include "fieldlink/store/blob_store.hpp"
#include "fieldlink/store/document_store.hpp"

namespace fieldlink::registry {

inline constexpr std::size_t kMinSecretLength = 8;
inline constexpr Millis kSessionLifetime = std::chrono::hours(24);

struct Contact {
  std::string phone;
  std::string locality;
};

struct UserAccount {
  std::string id;
  std::string name;
  Role role;
  Contact contact;
  Timestamp created_at;
};

struct SessionToken {
  std::string token;
  std::string user_id;
  Role role;
  Timestamp expires_at;
};

struct Farm {
  std::string id;
  std::string farmer_id;
  std::string name;
  std::string locality;
};

struct Crop {
  std::string id;
  std::string farm_id;
  std::string farmer_id;
  std::string kind;  // e.g. orange, tangerine, Tahiti lime
  std::string planted_at;
  std::string notes;
};

struct FarmDetails {
  std::string name;
  std::string locality;
};

struct CropDetails {
  std::string kind;
  std::string planted_at;
  std::string notes;
};

nlohmann::json to_json(const Contact& c);
nlohmann::json to_json(const UserAccount& u);  // never includes the credential
nlohmann::json to_json(const Farm& f);
nlohmann::json to_json(const Crop& c);

// Accounts, sessions and the farm/crop production registry.
class Registry {
 public:
  Registry(store::DocumentStore& docs, const Clock& clock,
           PasswordHashParams hashing = PasswordHashParams::interactive());

  /// Throws WeakSecret, DuplicateName, or MissingField (empty name or contact).
  std::pair<UserAccount, SessionToken> register_user(std::string_view name, Role role, const Contact& contact,
                                                     std::string_view secret);

  /// Throws BadCredentials for an unknown name and a wrong secret alike.
  SessionToken authenticate(std::string_view name, std::string_view secret);

  /// Throws Unauthenticated for unknown or expired tokens.
  Actor resolve_token(std::string_view token) const;

  /// Throws UnknownUser.
  UserAccount user(std::string_view id) const;
  std::optional<UserAccount> find_user(std::string_view id) const;

  /// Throws Forbidden unless `actor` is a farmer; MissingField on an empty name.
  Farm create_farm(const Actor& actor, const FarmDetails& details);
  /// Throws UnknownFarm, NotOwner, MissingField.
  Crop create_crop(const Actor& actor, std::string_view farm_id, const CropDetails& details);

  /// Throws UnknownFarm / UnknownCrop.
  Farm farm(std::string_view id) const;
  Crop crop(std::string_view id) const;

  std::vector<Farm> farms_of(std::string_view farmer_id) const;
  std::vector<Crop> crops_of(std::string_view farmer_id) const;

 private:
  store::DocumentStore& docs_;
  const Clock& clock_;
  PasswordHashParams hashing_;
  std::string dummy_hash_;
};

/// Cross-reference violations across every collection (empty when sound).
std::vector<std::string> check_integrity(const store::DocumentStore& docs, const store::BlobStore& blobs);

}  // namespace fieldlink::registry

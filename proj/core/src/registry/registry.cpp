#include "fieldlink/registry/registry.hpp"

#include "fieldlink/common/error.hpp"
#include "fieldlink/store/collections.hpp"

namespace fieldlink::registry {

namespace cols = store::collections;
using nlohmann::json;

namespace {

UserAccount user_from(const store::Document& doc) {
  const auto& p = doc.payload;
  return {doc.id,
          p.at("name").get<std::string>(),
          *parse_role(p.at("role").get<std::string>()),
          {p.at("contact").at("phone").get<std::string>(), p.at("contact").at("locality").get<std::string>()},
          from_epoch_ms(p.at("created_at").get<std::int64_t>())};
}

Farm farm_from(const store::Document& doc) {
  const auto& p = doc.payload;
  return {doc.id, p.at("farmer_id").get<std::string>(), p.at("name").get<std::string>(),
          p.at("locality").get<std::string>()};
}

Crop crop_from(const store::Document& doc) {
  const auto& p = doc.payload;
  return {doc.id,
          p.at("farm_id").get<std::string>(),
          p.at("farmer_id").get<std::string>(),
          p.at("kind").get<std::string>(),
          p.at("planted_at").get<std::string>(),
          p.at("notes").get<std::string>()};
}

// Sessions are keyed by the token digest so the store never holds a usable token.
std::string session_key(std::string_view token) { return sha256_hex(as_bytes(token)); }

void require_farmer(const Actor& actor) {
  if (actor.role != Role::farmer) throw Error(Errc::forbidden, "only farmers manage farms and crops");
}

}  // namespace

json to_json(const Contact& c) { return {{"phone", c.phone}, {"locality", c.locality}}; }

json to_json(const UserAccount& u) {
  return {{"id", u.id},
          {"name", u.name},
          {"role", to_string(u.role)},
          {"contact", to_json(u.contact)},
          {"created_at", to_epoch_ms(u.created_at)}};
}

json to_json(const Farm& f) {
  return {{"id", f.id}, {"farmer_id", f.farmer_id}, {"name", f.name}, {"locality", f.locality}};
}

json to_json(const Crop& c) {
  return {{"id", c.id},           {"farm_id", c.farm_id}, {"farmer_id", c.farmer_id},
          {"kind", c.kind},       {"planted_at", c.planted_at}, {"notes", c.notes}};
}

Registry::Registry(store::DocumentStore& docs, const Clock& clock, PasswordHashParams hashing)
    : docs_(docs), clock_(clock), hashing_(hashing), dummy_hash_(hash_password("not-a-real-secret", hashing)) {}

std::pair<UserAccount, SessionToken> Registry::register_user(std::string_view name, Role role, const Contact& contact,
                                                             std::string_view secret) {
  if (name.empty()) throw Error(Errc::missing_field, "name must not be empty");
  if (contact.phone.empty() && contact.locality.empty()) {
    throw Error(Errc::missing_field, "a contact record (phone or locality) is required");
  }
  if (secret.size() < kMinSecretLength) {
    throw Error(Errc::weak_secret, "secret must have at least " + std::to_string(kMinSecretLength) + " characters");
  }
  UserAccount account{new_id("u"), std::string(name), role, contact, clock_.now()};
  try {
    docs_.put_cas(cols::usernames, name, 0, {{"user_id", account.id}});
  } catch (const Error& e) {
    if (e.code() == Errc::version_conflict) throw Error(Errc::duplicate_name, "name '" + account.name + "' is taken");
    throw;
  }
  json payload = {{"name", account.name},
                  {"role", to_string(role)},
                  {"contact", to_json(contact)},
                  {"credential", hash_password(secret, hashing_)},
                  {"created_at", to_epoch_ms(account.created_at)}};
  docs_.put_cas(cols::users, account.id, 0, std::move(payload));
  return {account, authenticate(name, secret)};
}

SessionToken Registry::authenticate(std::string_view name, std::string_view secret) {
  const auto mapping = docs_.find(cols::usernames, name);
  std::optional<store::Document> user;
  if (mapping) user = docs_.find(cols::users, mapping->payload.at("user_id").get<std::string>());
  // Verify against a dummy hash for unknown names so both failures cost the same.
  const std::string stored = user ? user->payload.at("credential").get<std::string>() : dummy_hash_;
  const bool ok = verify_password(stored, secret);
  if (!user || !ok) throw Error(Errc::bad_credentials, "unknown name or wrong secret");

  const auto account = user_from(*user);
  SessionToken session{random_hex(32), account.id, account.role, clock_.now() + kSessionLifetime};
  docs_.put_cas(cols::sessions, session_key(session.token), 0,
                {{"user_id", session.user_id},
                 {"role", to_string(session.role)},
                 {"expires_at", to_epoch_ms(session.expires_at)}});
  return session;
}

Actor Registry::resolve_token(std::string_view token) const {
  if (token.empty()) throw Error(Errc::unauthenticated, "missing session token");
  const auto doc = docs_.find(cols::sessions, session_key(token));
  if (!doc) throw Error(Errc::unauthenticated, "unknown session token");
  if (from_epoch_ms(doc->payload.at("expires_at").get<std::int64_t>()) <= clock_.now()) {
    throw Error(Errc::unauthenticated, "session expired");
  }
  return {doc->payload.at("user_id").get<std::string>(), *parse_role(doc->payload.at("role").get<std::string>())};
}

std::optional<UserAccount> Registry::find_user(std::string_view id) const {
  const auto doc = docs_.find(cols::users, id);
  if (!doc) return std::nullopt;
  return user_from(*doc);
}

UserAccount Registry::user(std::string_view id) const {
  auto u = find_user(id);
  if (!u) throw Error(Errc::unknown_user, "unknown user " + std::string(id));
  return *u;
}

Farm Registry::create_farm(const Actor& actor, const FarmDetails& details) {
  require_farmer(actor);
  if (details.name.empty()) throw Error(Errc::missing_field, "farm name must not be empty");
  Farm farm{new_id("farm"), actor.user_id, details.name, details.locality};
  auto payload = to_json(farm);
  payload.erase("id");
  payload["created_at"] = to_epoch_ms(clock_.now());
  docs_.put_cas(cols::farms, farm.id, 0, std::move(payload));
  return farm;
}

Crop Registry::create_crop(const Actor& actor, std::string_view farm_id, const CropDetails& details) {
  require_farmer(actor);
  const auto owner = farm(farm_id);
  if (owner.farmer_id != actor.user_id) throw Error(Errc::not_owner, "farm " + owner.id + " belongs to another farmer");
  if (details.kind.empty()) throw Error(Errc::missing_field, "crop kind must not be empty");
  Crop crop{new_id("crop"), owner.id, actor.user_id, details.kind, details.planted_at, details.notes};
  auto payload = to_json(crop);
  payload.erase("id");
  docs_.put_cas(cols::crops, crop.id, 0, std::move(payload));
  return crop;
}

Farm Registry::farm(std::string_view id) const {
  const auto doc = docs_.find(cols::farms, id);
  if (!doc) throw Error(Errc::unknown_farm, "unknown farm " + std::string(id));
  return farm_from(*doc);
}

Crop Registry::crop(std::string_view id) const {
  const auto doc = docs_.find(cols::crops, id);
  if (!doc) throw Error(Errc::unknown_crop, "unknown crop " + std::string(id));
  return crop_from(*doc);
}

std::vector<Farm> Registry::farms_of(std::string_view farmer_id) const {
  std::vector<Farm> out;
  for (const auto& d : docs_.list(cols::farms, store::ListQuery::matching("farmer_id", farmer_id))) {
    out.push_back(farm_from(d));
  }
  return out;
}

std::vector<Crop> Registry::crops_of(std::string_view farmer_id) const {
  std::vector<Crop> out;
  for (const auto& d : docs_.list(cols::crops, store::ListQuery::matching("farmer_id", farmer_id))) {
    out.push_back(crop_from(d));
  }
  return out;
}

}  // namespace fieldlink::registry

#include "fieldlink/marketplace/marketplace.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "fieldlink/common/crypto.hpp"
#include "fieldlink/common/error.hpp"
#include "fieldlink/store/collections.hpp"

namespace fieldlink::marketplace {

namespace cols = store::collections;
using nlohmann::json;

namespace {

std::string offer_id(std::string_view listing_id, std::uint64_t seq) {
  char buf[24];
  std::snprintf(buf, sizeof buf, ":%010llu", static_cast<unsigned long long>(seq));
  return std::string(listing_id) + buf;
}

json contact_json(const registry::Contact& c) { return registry::to_json(c); }

registry::Contact contact_from(const json& j) {
  return {j.at("phone").get<std::string>(), j.at("locality").get<std::string>()};
}

Listing listing_from(const store::Document& doc) {
  const auto& p = doc.payload;
  Listing l;
  l.id = doc.id;
  l.farmer_id = p.at("farmer_id").get<std::string>();
  l.details = details_from_json(p);
  l.created_at = from_epoch_ms(p.at("created_at").get<std::int64_t>());
  l.status = parse_listing_status(p.at("status").get<std::string>());
  l.offer_count = p.at("offer_count").get<std::uint64_t>();
  if (p.contains("best_amount")) l.best_amount = p.at("best_amount").get<Money>();
  if (p.contains("best_merchant_id")) l.best_merchant_id = p.at("best_merchant_id").get<std::string>();
  if (p.contains("closed_at")) l.closed_at = from_epoch_ms(p.at("closed_at").get<std::int64_t>());
  return l;
}

Offer offer_from(const json& p) {
  return {p.at("listing_id").get<std::string>(), p.at("merchant_id").get<std::string>(), p.at("amount").get<Money>(),
          from_epoch_ms(p.at("placed_at").get<std::int64_t>()), p.at("seq").get<std::uint64_t>()};
}

Purchase purchase_from(const json& p) {
  return {p.at("listing_id").get<std::string>(),
          p.at("merchant_id").get<std::string>(),
          p.at("farmer_id").get<std::string>(),
          p.at("product_name").get<std::string>(),
          p.at("final_price").get<Money>(),
          contact_from(p.at("farmer_contact")),
          contact_from(p.at("merchant_contact")),
          from_epoch_ms(p.at("closed_at").get<std::int64_t>())};
}

json listing_payload(const Listing& l) {
  auto j = to_json(l);
  j.erase("id");
  return j;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string make_cursor(const Listing& l) {
  return std::to_string(to_epoch_ms(l.details.ends_at)) + ":" + l.id;
}

std::pair<std::int64_t, std::string> parse_cursor(const std::string& cursor) {
  const auto colon = cursor.find(':');
  if (colon == std::string::npos) throw Error(Errc::invalid_argument, "malformed cursor");
  try {
    return {std::stoll(cursor.substr(0, colon)), cursor.substr(colon + 1)};
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, "malformed cursor");
  }
}

}  // namespace

std::string_view to_string(ListingStatus s) noexcept {
  switch (s) {
    case ListingStatus::open: return "open";
    case ListingStatus::closed_sold: return "closed_sold";
    case ListingStatus::closed_unsold: return "closed_unsold";
  }
  return "open";
}

ListingStatus parse_listing_status(std::string_view text) {
  if (text == "open") return ListingStatus::open;
  if (text == "closed_sold") return ListingStatus::closed_sold;
  if (text == "closed_unsold") return ListingStatus::closed_unsold;
  throw Error(Errc::invalid_argument, "unknown listing status '" + std::string(text) + "'");
}

json to_json(const ListingDetails& d) {
  return {{"product_name", d.product_name},
          {"quantity", d.quantity},
          {"unit", d.unit},
          {"description", d.description},
          {"photo_refs", d.photo_refs},
          {"crop_id", d.crop_id ? json(*d.crop_id) : json()},
          {"production_info", d.production_info},
          {"starting_price", d.starting_price},
          {"ends_at", to_epoch_ms(d.ends_at)}};
}

ListingDetails details_from_json(const json& j) {
  ListingDetails d;
  d.product_name = j.value("product_name", "");
  d.quantity = j.value("quantity", 0.0);
  d.unit = j.value("unit", "");
  d.description = j.value("description", "");
  if (j.contains("photo_refs")) d.photo_refs = j.at("photo_refs").get<std::vector<std::string>>();
  if (j.contains("crop_id") && j.at("crop_id").is_string()) d.crop_id = j.at("crop_id").get<std::string>();
  d.production_info = j.value("production_info", "");
  d.starting_price = j.value("starting_price", Money{0});
  if (!j.contains("ends_at")) throw Error(Errc::missing_field, "ends_at is required");
  d.ends_at = from_epoch_ms(j.at("ends_at").get<std::int64_t>());
  return d;
}

json to_json(const Listing& l) {
  auto j = to_json(l.details);
  j["id"] = l.id;
  j["farmer_id"] = l.farmer_id;
  j["created_at"] = to_epoch_ms(l.created_at);
  j["status"] = to_string(l.status);
  j["offer_count"] = l.offer_count;
  if (l.best_amount) j["best_amount"] = *l.best_amount;
  if (l.best_merchant_id) j["best_merchant_id"] = *l.best_merchant_id;
  if (l.closed_at) j["closed_at"] = to_epoch_ms(*l.closed_at);
  return j;
}

json to_json(const Offer& o) {
  return {{"listing_id", o.listing_id},
          {"merchant_id", o.merchant_id},
          {"amount", o.amount},
          {"placed_at", to_epoch_ms(o.placed_at)},
          {"seq", o.seq}};
}

json to_json(const Purchase& p) {
  return {{"listing_id", p.listing_id},
          {"merchant_id", p.merchant_id},
          {"farmer_id", p.farmer_id},
          {"product_name", p.product_name},
          {"final_price", p.final_price},
          {"farmer_contact", contact_json(p.farmer_contact)},
          {"merchant_contact", contact_json(p.merchant_contact)},
          {"closed_at", to_epoch_ms(p.closed_at)}};
}

MarketplaceService::MarketplaceService(store::DocumentStore& docs, const store::BlobStore& blobs,
                                       const registry::Registry& registry, EventSink& events, const Clock& clock)
    : docs_(docs), blobs_(blobs), registry_(registry), events_(events), clock_(clock) {}

Listing MarketplaceService::publish_listing(const Actor& farmer, const ListingDetails& details) {
  if (farmer.role != Role::farmer) throw Error(Errc::forbidden, "only farmers publish listings");
  if (details.product_name.empty()) throw Error(Errc::missing_field, "product_name must not be empty");
  if (!(details.quantity > 0)) throw Error(Errc::missing_field, "quantity must be positive");
  if (details.unit.empty()) throw Error(Errc::missing_field, "unit must not be empty");
  if (details.starting_price < 0) throw Error(Errc::missing_field, "starting_price must not be negative");
  const auto now = clock_.now();
  if (details.ends_at <= now) {
    throw Error(Errc::past_deadline, "auction end must lie in the future", {{"now", to_epoch_ms(now)}});
  }
  for (const auto& ref : details.photo_refs) {
    if (!blobs_.contains(ref)) throw Error(Errc::not_found, "unknown photo blob " + ref);
  }
  if (details.crop_id) {
    const auto crop = registry_.crop(*details.crop_id);
    if (crop.farmer_id != farmer.user_id) throw Error(Errc::not_owner, "crop " + crop.id + " belongs to another farmer");
  }
  Listing l;
  l.id = new_id("lst");
  l.farmer_id = farmer.user_id;
  l.details = details;
  l.created_at = now;
  docs_.put_cas(cols::listings, l.id, 0, listing_payload(l));
  return l;
}

Offer MarketplaceService::place_offer(const Actor& merchant, std::string_view listing_id, Money amount) {
  if (merchant.role != Role::merchant) throw Error(Errc::forbidden, "only merchants place offers");
  std::lock_guard lock(listing_locks_.for_key(listing_id));
  const auto doc = docs_.get(cols::listings, listing_id);
  auto l = listing_from(doc);
  const auto now = clock_.now();
  if (l.status != ListingStatus::open) throw Error(Errc::auction_closed, "auction " + l.id + " is closed");
  if (now >= l.details.ends_at) {
    close_locked(doc);
    throw Error(Errc::auction_closed, "auction " + l.id + " ended");
  }
  const bool ok = l.best_amount ? amount > *l.best_amount : amount >= l.details.starting_price;
  if (!ok) {
    throw Error(Errc::bid_too_low, "offer must exceed the current best",
                {{"current_best", l.best_amount ? json(*l.best_amount) : json()},
                 {"starting_price", l.details.starting_price}});
  }

  Offer offer{l.id, merchant.user_id, amount, now, l.offer_count + 1};
  docs_.put_cas(cols::offers, offer_id(l.id, offer.seq), 0, to_json(offer));
  const auto displaced = l.best_merchant_id;
  const auto displaced_amount = l.best_amount;
  l.offer_count = offer.seq;
  l.best_amount = amount;
  l.best_merchant_id = merchant.user_id;
  // The per-listing lock makes this the only writer.
  docs_.put_cas(cols::listings, l.id, doc.version, listing_payload(l));

  events_.publish({std::string(kOfferEvent), l.id, {}, to_json(offer)});
  if (displaced && *displaced != merchant.user_id) {
    events_.publish({std::string(kOutbidEvent),
                     l.id,
                     {*displaced},
                     {{"listing_id", l.id},
                      {"product_name", l.details.product_name},
                      {"your_amount", *displaced_amount},
                      {"best_amount", amount},
                      {"seq", offer.seq}}});
  }
  return offer;
}

CloseOutcome MarketplaceService::close_auction(std::string_view listing_id) {
  std::lock_guard lock(listing_locks_.for_key(listing_id));
  const auto doc = docs_.get(cols::listings, listing_id);
  const auto l = listing_from(doc);
  if (l.status != ListingStatus::open) throw Error(Errc::already_closed, "auction " + l.id + " is already closed");
  if (clock_.now() < l.details.ends_at) {
    throw Error(Errc::not_yet_ended, "auction " + l.id + " has not ended",
                {{"ends_at", to_epoch_ms(l.details.ends_at)}});
  }
  return close_locked(doc);
}

CloseOutcome MarketplaceService::close_locked(const store::Document& listing_doc) {
  auto l = listing_from(listing_doc);
  const auto now = clock_.now();
  CloseOutcome outcome;
  l.closed_at = now;
  if (l.offer_count == 0) {
    l.status = ListingStatus::closed_unsold;
    docs_.put_cas(cols::listings, l.id, listing_doc.version, listing_payload(l));
    outcome.listing = l;
    events_.publish({std::string(kClosedEvent), l.id, {l.farmer_id}, {{"listing", to_json(l)}, {"sold", false}}});
    return outcome;
  }

  const auto farmer = registry_.user(l.farmer_id);
  const auto winner = registry_.user(*l.best_merchant_id);
  Purchase p{l.id,      winner.id,       farmer.id, l.details.product_name, *l.best_amount, farmer.contact,
             winner.contact, now};
  if (const auto existing = docs_.find(cols::purchases, l.id)) {
    // Left behind by an interrupted close.
    p = purchase_from(existing->payload);
  } else {
    docs_.put_cas(cols::purchases, l.id, 0, to_json(p));
  }
  l.status = ListingStatus::closed_sold;
  docs_.put_cas(cols::listings, l.id, listing_doc.version, listing_payload(l));
  outcome.listing = l;
  outcome.purchase = p;
  events_.publish({std::string(kClosedEvent),
                   l.id,
                   {winner.id, farmer.id},
                   {{"listing", to_json(l)}, {"sold", true}, {"purchase", to_json(p)}}});
  return outcome;
}

std::size_t MarketplaceService::sweep() {
  const auto now = clock_.now();
  std::size_t closed = 0;
  for (const auto& doc : docs_.list(cols::listings, store::ListQuery::matching("status", "open"))) {
    if (from_epoch_ms(doc.payload.at("ends_at").get<std::int64_t>()) > now) continue;
    try {
      close_auction(doc.id);
      ++closed;
    } catch (const Error& e) {
      // A concurrent bid may have closed it lazily.
      if (e.code() != Errc::already_closed) throw;
    }
  }
  return closed;
}

OnsalePage MarketplaceService::list_onsale(const Actor& merchant, const OnsaleQuery& query) const {
  if (merchant.role != Role::merchant) throw Error(Errc::forbidden, "only merchants browse on-sale products");
  if (query.limit == 0) throw Error(Errc::invalid_argument, "limit must be positive");
  const auto now = clock_.now();
  const auto needle = lower(query.text);
  std::vector<Listing> open;
  for (const auto& doc : docs_.list(cols::listings, store::ListQuery::matching("status", "open"))) {
    auto l = listing_from(doc);
    if (l.details.ends_at <= now) continue;
    if (!needle.empty() && lower(l.details.product_name).find(needle) == std::string::npos) continue;
    open.push_back(std::move(l));
  }
  auto key = [](const Listing& l) { return std::pair{to_epoch_ms(l.details.ends_at), std::string_view(l.id)}; };
  std::sort(open.begin(), open.end(), [&](const Listing& a, const Listing& b) { return key(a) < key(b); });

  auto it = open.begin();
  if (!query.cursor.empty()) {
    const auto [end, id] = parse_cursor(query.cursor);
    const std::pair<std::int64_t, std::string_view> after{end, id};
    it = std::upper_bound(open.begin(), open.end(), after,
                          [&](const auto& value, const Listing& l) { return value < key(l); });
  }
  OnsalePage page;
  for (; it != open.end() && page.items.size() < query.limit; ++it) page.items.push_back(*it);
  if (it != open.end() && !page.items.empty()) page.next_cursor = make_cursor(page.items.back());
  return page;
}

std::vector<Purchase> MarketplaceService::purchase_history(const Actor& actor) const {
  std::string field;
  if (actor.role == Role::merchant) field = "merchant_id";
  if (actor.role == Role::farmer) field = "farmer_id";
  if (field.empty()) return {};
  std::vector<Purchase> out;
  for (const auto& doc : docs_.list(cols::purchases, store::ListQuery::matching(field, json(actor.user_id)))) {
    out.push_back(purchase_from(doc.payload));
  }
  std::stable_sort(out.begin(), out.end(), [](const Purchase& a, const Purchase& b) {
    return a.closed_at != b.closed_at ? a.closed_at > b.closed_at : a.listing_id < b.listing_id;
  });
  return out;
}

Listing MarketplaceService::listing(std::string_view listing_id) const {
  return listing_from(docs_.get(cols::listings, listing_id));
}

std::vector<Listing> MarketplaceService::listings_of(std::string_view farmer_id) const {
  std::vector<Listing> out;
  for (const auto& doc : docs_.list(cols::listings, store::ListQuery::matching("farmer_id", farmer_id))) {
    out.push_back(listing_from(doc));
  }
  return out;
}

std::vector<Offer> MarketplaceService::offers_for(std::string_view listing_id) const {
  const auto l = listing(listing_id);
  std::vector<Offer> out;
  for (std::uint64_t seq = 1; seq <= l.offer_count; ++seq) {
    if (const auto doc = docs_.find(cols::offers, offer_id(l.id, seq))) out.push_back(offer_from(doc->payload));
  }
  return out;
}

std::vector<Offer> MarketplaceService::offers_by(std::string_view merchant_id) const {
  std::vector<Offer> out;
  for (const auto& doc : docs_.list(cols::offers, store::ListQuery::matching("merchant_id", merchant_id))) {
    out.push_back(offer_from(doc.payload));
  }
  return out;
}

}  // namespace fieldlink::marketplace

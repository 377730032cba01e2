#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldlink/common/actor.hpp"
#include "fieldlink/common/clock.hpp"
#include "fieldlink/common/events.hpp"
#include "fieldlink/common/striped_mutex.hpp"
#include "fieldlink/registry/registry.hpp"
#include "fieldlink/store/blob_store.hpp"
#include "fieldlink/store/document_store.hpp"

namespace fieldlink::marketplace {

// Smallest currency unit.
using Money = std::int64_t;

inline constexpr std::string_view kOfferEvent = "auction.offer";
inline constexpr std::string_view kOutbidEvent = "auction.outbid";
inline constexpr std::string_view kClosedEvent = "auction.closed";

enum class ListingStatus { open, closed_sold, closed_unsold };

std::string_view to_string(ListingStatus s) noexcept;
ListingStatus parse_listing_status(std::string_view text);

struct ListingDetails {
  std::string product_name;
  double quantity = 0;
  std::string unit;
  std::string description;
  std::vector<std::string> photo_refs;
  std::optional<std::string> crop_id;
  std::string production_info;
  Money starting_price = 0;
  Timestamp ends_at;
};

struct Listing {
  std::string id;
  std::string farmer_id;
  ListingDetails details;
  Timestamp created_at;
  ListingStatus status = ListingStatus::open;
  std::uint64_t offer_count = 0;
  std::optional<Money> best_amount;
  std::optional<std::string> best_merchant_id;
  std::optional<Timestamp> closed_at;
};

struct Offer {
  std::string listing_id;
  std::string merchant_id;
  Money amount = 0;
  Timestamp placed_at;
  std::uint64_t seq = 0;
};

struct Purchase {
  std::string listing_id;
  std::string merchant_id;
  std::string farmer_id;
  std::string product_name;
  Money final_price = 0;
  registry::Contact farmer_contact;
  registry::Contact merchant_contact;
  Timestamp closed_at;
};

struct CloseOutcome {
  Listing listing;
  std::optional<Purchase> purchase;
};

struct OnsaleQuery {
  std::string text;    // case-insensitive product-name filter; empty = all
  std::string cursor;  // opaque, from the previous page
  std::size_t limit = 50;
};

struct OnsalePage {
  std::vector<Listing> items;
  std::string next_cursor;  // empty on the last page
};

nlohmann::json to_json(const ListingDetails& d);
nlohmann::json to_json(const Listing& l);
nlohmann::json to_json(const Offer& o);
nlohmann::json to_json(const Purchase& p);
ListingDetails details_from_json(const nlohmann::json& j);

// English auctions: strictly increasing offers until a fixed deadline.
class MarketplaceService {
 public:
  MarketplaceService(store::DocumentStore& docs, const store::BlobStore& blobs, const registry::Registry& registry,
                     EventSink& events, const Clock& clock);

  /// Throws Forbidden, PastDeadline, MissingField, NotFound (photo),
  /// UnknownCrop, NotOwner.
  Listing publish_listing(const Actor& farmer, const ListingDetails& details);

  /// Throws Forbidden, NotFound, AuctionClosed, BidTooLow (details carry
  /// current_best and starting_price).
  Offer place_offer(const Actor& merchant, std::string_view listing_id, Money amount);

  /// Throws NotFound, NotYetEnded, AlreadyClosed.
  CloseOutcome close_auction(std::string_view listing_id);

  /// Closes every open listing whose deadline has passed; returns how many.
  std::size_t sweep();

  /// Open listings ordered by (end, id). Throws Forbidden for non-merchants.
  OnsalePage list_onsale(const Actor& merchant, const OnsaleQuery& query) const;

  /// Merchants: purchases won. Farmers: completed sales. Newest first.
  std::vector<Purchase> purchase_history(const Actor& actor) const;

  Listing listing(std::string_view listing_id) const;
  std::vector<Listing> listings_of(std::string_view farmer_id) const;
  std::vector<Offer> offers_for(std::string_view listing_id) const;
  std::vector<Offer> offers_by(std::string_view merchant_id) const;

 private:
  CloseOutcome close_locked(const store::Document& listing_doc);

  store::DocumentStore& docs_;
  const store::BlobStore& blobs_;
  const registry::Registry& registry_;
  EventSink& events_;
  const Clock& clock_;
  StripedMutex<> listing_locks_;
};

}  // namespace fieldlink::marketplace

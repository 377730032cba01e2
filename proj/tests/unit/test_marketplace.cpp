#include <chrono>
#include <random>
#include <set>
#include <thread>

#include "doctest.h"
#include "fieldlink/store/collections.hpp"
#include "fieldlink/testing/oracles.hpp"
#include "unit_support.hpp"

using namespace fieldlink;
using namespace std::chrono_literals;
using testing::code_of;
using testing::World;

namespace {

marketplace::ListingDetails lot(const World& w, marketplace::Money start, Millis duration = 1h,
                                std::string name = "Pera oranges") {
  marketplace::ListingDetails d;
  d.product_name = std::move(name);
  d.quantity = 40;
  d.unit = "box";
  d.starting_price = start;
  d.ends_at = w.clock.now() + duration;
  return d;
}

}  // namespace

TEST_SUITE("marketplace") {
  TEST_CASE("publishing validates the seller and the details") {
    World w;
    const auto farmer = w.user("ana", Role::farmer);
    const auto other = w.user("bia", Role::farmer);
    const auto merchant = w.user("caio", Role::merchant);
    CHECK(code_of([&] { w.market.publish_listing(merchant, lot(w, 10)); }) == Errc::forbidden);
    auto past = lot(w, 10);
    past.ends_at = w.clock.now();
    CHECK(code_of([&] { w.market.publish_listing(farmer, past); }) == Errc::past_deadline);
    auto nameless = lot(w, 10);
    nameless.product_name.clear();
    CHECK(code_of([&] { w.market.publish_listing(farmer, nameless); }) == Errc::missing_field);
    auto no_qty = lot(w, 10);
    no_qty.quantity = 0;
    CHECK(code_of([&] { w.market.publish_listing(farmer, no_qty); }) == Errc::missing_field);
    auto bad_photo = lot(w, 10);
    bad_photo.photo_refs = {std::string(64, 'a')};
    CHECK(code_of([&] { w.market.publish_listing(farmer, bad_photo); }) == Errc::not_found);
    const auto crop = w.crop_for(farmer);
    auto foreign_crop = lot(w, 10);
    foreign_crop.crop_id = crop.id;
    CHECK(code_of([&] { w.market.publish_listing(other, foreign_crop); }) == Errc::not_owner);
    foreign_crop.crop_id = "crop_missing";
    CHECK(code_of([&] { w.market.publish_listing(farmer, foreign_crop); }) == Errc::unknown_crop);

    auto good = lot(w, 10);
    good.crop_id = crop.id;
    good.photo_refs = {w.blobs.put(testing::png_bytes(testing::solid_image(2, 2, 200, 120, 0)))};
    const auto l = w.market.publish_listing(farmer, good);
    CHECK(l.status == marketplace::ListingStatus::open);
    CHECK(l.offer_count == 0);
    CHECK_FALSE(l.best_amount.has_value());
    CHECK(marketplace::details_from_json(marketplace::to_json(l.details)).crop_id == crop.id);
  }

  TEST_CASE("offers must reach the start and then strictly increase") {
    World w;
    const auto farmer = w.user("ana", Role::farmer);
    const auto m1 = w.user("m1", Role::merchant);
    const auto m2 = w.user("m2", Role::merchant);
    const auto l = w.market.publish_listing(farmer, lot(w, 100));
    CHECK(code_of([&] { w.market.place_offer(farmer, l.id, 500); }) == Errc::forbidden);
    try {
      w.market.place_offer(m1, l.id, 99);
      FAIL("expected BidTooLow");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::bid_too_low);
      CHECK(e.details()["current_best"].is_null());
      CHECK(e.details()["starting_price"] == 100);
    }
    CHECK(w.market.place_offer(m1, l.id, 100).seq == 1);
    CHECK(code_of([&] { w.market.place_offer(m2, l.id, 100); }) == Errc::bid_too_low);
    CHECK(w.market.place_offer(m2, l.id, 101).seq == 2);
    CHECK(w.events.count(std::string(marketplace::kOutbidEvent), m1.user_id) == 1);
    // Raising one's own offer notifies nobody.
    CHECK(w.market.place_offer(m2, l.id, 150).seq == 3);
    CHECK(w.events.count(std::string(marketplace::kOutbidEvent), m2.user_id) == 0);
    CHECK(w.events.count(std::string(marketplace::kOutbidEvent), m1.user_id) == 1);
    CHECK(w.events_of(marketplace::kOfferEvent) == 3);

    const auto current = w.market.listing(l.id);
    CHECK(current.best_amount == 150);
    CHECK(current.best_merchant_id == m2.user_id);
    CHECK(w.market.offers_by(m2.user_id).size() == 2);
    CHECK(code_of([&] { w.market.place_offer(m1, "lst_missing", 500); }) == Errc::not_found);
  }

  TEST_CASE("closing picks the best offer and records a purchase") {
    World w;
    const auto farmer = w.user("ana", Role::farmer);
    const auto m1 = w.user("m1", Role::merchant);
    const auto m2 = w.user("m2", Role::merchant);
    const auto l = w.market.publish_listing(farmer, lot(w, 100));
    w.market.place_offer(m1, l.id, 120);
    w.market.place_offer(m2, l.id, 130);
    CHECK(code_of([&] { w.market.close_auction(l.id); }) == Errc::not_yet_ended);
    w.clock.advance(1h);
    CHECK(code_of([&] { w.market.place_offer(m1, l.id, 999); }) == Errc::auction_closed);
    // The late offer closed the auction lazily.
    CHECK(code_of([&] { w.market.close_auction(l.id); }) == Errc::already_closed);
    const auto closed = w.market.listing(l.id);
    CHECK(closed.status == marketplace::ListingStatus::closed_sold);
    CHECK(closed.best_amount == 130);

    const auto bought = w.market.purchase_history(m2);
    REQUIRE(bought.size() == 1);
    CHECK(bought[0].final_price == 130);
    CHECK(bought[0].farmer_contact.locality == "Bebedouro");
    CHECK(w.market.purchase_history(m1).empty());
    CHECK(w.market.purchase_history(farmer).size() == 1);
    CHECK(w.events.count(std::string(marketplace::kClosedEvent), m2.user_id) == 1);
    CHECK(w.events.count(std::string(marketplace::kClosedEvent), farmer.user_id) == 1);
    CHECK(registry::check_integrity(w.docs, w.blobs).empty());
  }

  TEST_CASE("auctions without offers close unsold") {
    World w;
    const auto farmer = w.user("ana", Role::farmer);
    const auto l = w.market.publish_listing(farmer, lot(w, 100, 10min));
    w.clock.advance(10min);
    const auto outcome = w.market.close_auction(l.id);
    CHECK(outcome.listing.status == marketplace::ListingStatus::closed_unsold);
    CHECK_FALSE(outcome.purchase.has_value());
    CHECK(w.docs.count(store::collections::purchases) == 0);
  }

  TEST_CASE("sweep closes exactly the ended auctions") {
    World w;
    const auto farmer = w.user("ana", Role::farmer);
    for (int i = 1; i <= 6; ++i) w.market.publish_listing(farmer, lot(w, 1, std::chrono::hours(i)));
    w.clock.advance(3h);
    CHECK(w.market.sweep() == 3);
    CHECK(w.market.sweep() == 0);
    std::size_t open = 0;
    for (const auto& l : w.market.listings_of(farmer.user_id)) open += l.status == marketplace::ListingStatus::open;
    CHECK(open == 3);
  }

  TEST_CASE("random offer streams match the fold oracle") {
    World w;
    const auto farmer = w.user("ana", Role::farmer);
    std::vector<Actor> merchants;
    for (int i = 0; i < 3; ++i) merchants.push_back(w.user("m" + std::to_string(i), Role::merchant));
    std::mt19937_64 rng(77);
    for (int stream = 0; stream < 200; ++stream) {
      const auto start = static_cast<marketplace::Money>(rng() % 20);
      const auto l = w.market.publish_listing(farmer, lot(w, start));
      std::vector<testing::BidAttempt> attempts;
      for (std::size_t i = 0, n = rng() % 10; i < n; ++i) {
        attempts.push_back({merchants[rng() % 3].user_id, static_cast<std::int64_t>(rng() % 40)});
      }
      w.events.clear();
      std::vector<std::size_t> accepted;
      for (std::size_t i = 0; i < attempts.size(); ++i) {
        try {
          w.market.place_offer({attempts[i].merchant, Role::merchant}, l.id, attempts[i].amount);
          accepted.push_back(i);
        } catch (const Error& e) {
          REQUIRE(e.code() == Errc::bid_too_low);
        }
      }
      const auto oracle = testing::fold_auction(start, attempts);
      CHECK(accepted == oracle.accepted);
      const auto after = w.market.listing(l.id);
      CHECK(after.best_amount == oracle.price);
      CHECK(after.best_merchant_id == oracle.winner);
      for (const auto& m : merchants) {
        const auto expected = oracle.outbid.count(m.user_id) ? oracle.outbid.at(m.user_id) : 0;
        CHECK(w.events.count(std::string(marketplace::kOutbidEvent), m.user_id) == expected);
      }
      // Accepted offers strictly increase.
      const auto offers = w.market.offers_for(l.id);
      for (std::size_t i = 1; i < offers.size(); ++i) CHECK(offers[i].amount > offers[i - 1].amount);
    }
  }

  TEST_CASE("on-sale browsing orders by deadline, filters and pages") {
    World w;
    const auto farmer = w.user("ana", Role::farmer);
    const auto merchant = w.user("caio", Role::merchant);
    for (int i = 0; i < 9; ++i) {
      w.market.publish_listing(farmer, lot(w, 1, std::chrono::hours(9 - i), i % 3 == 0 ? "Tahiti lime" : "Orange"));
    }
    CHECK(code_of([&] { w.market.list_onsale(farmer, {}); }) == Errc::forbidden);
    marketplace::OnsaleQuery q;
    q.limit = 4;
    std::vector<marketplace::Listing> seen;
    for (;;) {
      const auto page = w.market.list_onsale(merchant, q);
      seen.insert(seen.end(), page.items.begin(), page.items.end());
      if (page.next_cursor.empty()) break;
      q.cursor = page.next_cursor;
    }
    REQUIRE(seen.size() == 9);
    for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1].details.ends_at <= seen[i].details.ends_at);
    marketplace::OnsaleQuery limes;
    limes.text = "LIME";
    CHECK(w.market.list_onsale(merchant, limes).items.size() == 3);
    marketplace::OnsaleQuery bad;
    bad.cursor = "garbage";
    CHECK(code_of([&] { w.market.list_onsale(merchant, bad); }) == Errc::invalid_argument);
    w.clock.advance(150min);
    CHECK(w.market.list_onsale(merchant, {}).items.size() == 7);
  }

  TEST_CASE("concurrent offers on one listing stay consistent") {
    World w;
    const auto farmer = w.user("ana", Role::farmer);
    std::vector<Actor> merchants;
    for (int i = 0; i < 4; ++i) merchants.push_back(w.user("m" + std::to_string(i), Role::merchant));
    const auto l = w.market.publish_listing(farmer, lot(w, 1));
    std::vector<std::thread> bidders;
    for (std::size_t t = 0; t < merchants.size(); ++t) {
      bidders.emplace_back([&, t] {
        for (int i = 1; i <= 50; ++i) {
          try {
            w.market.place_offer(merchants[t], l.id, i * 10 + static_cast<int>(t));
          } catch (const Error& e) {
            CHECK(e.code() == Errc::bid_too_low);
          }
        }
      });
    }
    for (auto& b : bidders) b.join();
    const auto offers = w.market.offers_for(l.id);
    const auto final_listing = w.market.listing(l.id);
    CHECK(final_listing.offer_count == offers.size());
    for (std::size_t i = 0; i < offers.size(); ++i) {
      CHECK(offers[i].seq == i + 1);
      if (i > 0) CHECK(offers[i].amount > offers[i - 1].amount);
    }
    CHECK(final_listing.best_amount == offers.back().amount);
    CHECK(w.events_of(marketplace::kOfferEvent) == offers.size());
  }

  TEST_CASE("listing status names") {
    for (auto s : {marketplace::ListingStatus::open, marketplace::ListingStatus::closed_sold,
                   marketplace::ListingStatus::closed_unsold}) {
      CHECK(marketplace::parse_listing_status(marketplace::to_string(s)) == s);
    }
    CHECK(code_of([] { marketplace::parse_listing_status("pending"); }) == Errc::invalid_argument);
  }
}

#include "fieldlink/gateway/authz.hpp"

namespace fieldlink::gateway {

namespace {

struct Allowed {
  bool farmer;
  bool agronomist;
  bool merchant;
};

Allowed matrix(Endpoint e) noexcept {
  switch (e) {
    case Endpoint::me: return {true, true, true};
    case Endpoint::list_users: return {true, true, true};
    case Endpoint::create_farm: return {true, false, false};
    case Endpoint::create_crop: return {true, false, false};
    case Endpoint::list_farms: return {true, false, false};
    case Endpoint::list_crops: return {true, false, false};
    case Endpoint::upload_blob: return {true, false, false};
    case Endpoint::get_blob: return {true, true, true};
    case Endpoint::submit_sample: return {true, false, false};
    case Endpoint::list_requests: return {true, true, false};
    case Endpoint::get_request: return {true, true, false};
    case Endpoint::claim_request: return {false, true, false};
    case Endpoint::file_report: return {false, true, false};
    case Endpoint::diagnosis_history: return {true, true, false};
    case Endpoint::publish_listing: return {true, false, false};
    case Endpoint::list_listings: return {true, false, true};
    case Endpoint::get_listing: return {true, false, true};
    case Endpoint::listing_offers: return {true, false, true};
    case Endpoint::place_offer: return {false, false, true};
    case Endpoint::list_offers: return {false, false, true};
    case Endpoint::list_purchases: return {true, false, true};
    case Endpoint::open_thread: return {true, true, true};
    case Endpoint::list_threads: return {true, true, true};
    case Endpoint::send_message: return {true, true, true};
    case Endpoint::fetch_messages: return {true, true, true};
    case Endpoint::usage_stats: return {true, true, true};
    case Endpoint::download_trend: return {true, true, true};
    case Endpoint::realtime: return {true, true, true};
  }
  return {false, false, false};
}

}  // namespace

std::string_view to_string(Endpoint e) noexcept {
  switch (e) {
    case Endpoint::me: return "me";
    case Endpoint::list_users: return "list_users";
    case Endpoint::create_farm: return "create_farm";
    case Endpoint::create_crop: return "create_crop";
    case Endpoint::list_farms: return "list_farms";
    case Endpoint::list_crops: return "list_crops";
    case Endpoint::upload_blob: return "upload_blob";
    case Endpoint::get_blob: return "get_blob";
    case Endpoint::submit_sample: return "submit_sample";
    case Endpoint::list_requests: return "list_requests";
    case Endpoint::get_request: return "get_request";
    case Endpoint::claim_request: return "claim_request";
    case Endpoint::file_report: return "file_report";
    case Endpoint::diagnosis_history: return "diagnosis_history";
    case Endpoint::publish_listing: return "publish_listing";
    case Endpoint::list_listings: return "list_listings";
    case Endpoint::get_listing: return "get_listing";
    case Endpoint::listing_offers: return "listing_offers";
    case Endpoint::place_offer: return "place_offer";
    case Endpoint::list_offers: return "list_offers";
    case Endpoint::list_purchases: return "list_purchases";
    case Endpoint::open_thread: return "open_thread";
    case Endpoint::list_threads: return "list_threads";
    case Endpoint::send_message: return "send_message";
    case Endpoint::fetch_messages: return "fetch_messages";
    case Endpoint::usage_stats: return "usage_stats";
    case Endpoint::download_trend: return "download_trend";
    case Endpoint::realtime: return "realtime";
  }
  return "unknown";
}

bool authorize(Role role, Endpoint endpoint) noexcept {
  const auto a = matrix(endpoint);
  switch (role) {
    case Role::farmer: return a.farmer;
    case Role::agronomist: return a.agronomist;
    case Role::merchant: return a.merchant;
  }
  return false;
}

}  // namespace fieldlink::gateway

#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "fieldlink/common/actor.hpp"

namespace fieldlink::gateway {

// Every authenticated operation the API exposes.
enum class Endpoint {
  me,
  list_users,
  create_farm,
  create_crop,
  list_farms,
  list_crops,
  upload_blob,
  get_blob,
  submit_sample,
  list_requests,
  get_request,
  claim_request,
  file_report,
  diagnosis_history,
  publish_listing,
  list_listings,
  get_listing,
  listing_offers,
  place_offer,
  list_offers,
  list_purchases,
  open_thread,
  list_threads,
  send_message,
  fetch_messages,
  usage_stats,
  download_trend,
  realtime,
};

inline constexpr std::array kAllEndpoints = {
    Endpoint::me,              Endpoint::list_users,     Endpoint::create_farm,    Endpoint::create_crop,
    Endpoint::list_farms,      Endpoint::list_crops,     Endpoint::upload_blob,    Endpoint::get_blob,
    Endpoint::submit_sample,   Endpoint::list_requests,  Endpoint::get_request,    Endpoint::claim_request,
    Endpoint::file_report,     Endpoint::diagnosis_history, Endpoint::publish_listing, Endpoint::list_listings,
    Endpoint::get_listing,     Endpoint::listing_offers, Endpoint::place_offer,    Endpoint::list_offers,
    Endpoint::list_purchases,  Endpoint::open_thread,    Endpoint::list_threads,   Endpoint::send_message,
    Endpoint::fetch_messages,  Endpoint::usage_stats,    Endpoint::download_trend, Endpoint::realtime,
};

inline constexpr std::array kAllRoles = {Role::farmer, Role::agronomist, Role::merchant};

std::string_view to_string(Endpoint e) noexcept;

/// Static role x endpoint matrix following each role's views: farmers own
/// production, diagnosis submissions and listings; agronomists own the
/// request queue; merchants own offers. Chat and analytics are shared.
bool authorize(Role role, Endpoint endpoint) noexcept;

}  // namespace fieldlink::gateway

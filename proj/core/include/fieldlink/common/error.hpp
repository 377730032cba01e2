#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace fieldlink {

// Every domain failure the platform can report. The gateway maps these onto
// HTTP status codes; the CLI prints them verbatim and exits 1.
enum class Errc {
  decode_error,
  empty_mask,
  spec_error,
  shape_error,
  format_error,
  degenerate_dataset,
  io_error,
  invalid_argument,
  // registry / store
  weak_secret,
  duplicate_name,
  bad_credentials,
  unauthenticated,
  forbidden,
  not_owner,
  unknown_user,
  unknown_farm,
  unknown_crop,
  version_conflict,
  not_found,
  // diagnosis
  pipeline_error,
  invalid_state,
  already_claimed,
  not_assignee,
  already_diagnosed,
  // marketplace
  past_deadline,
  missing_field,
  auction_closed,
  bid_too_low,
  not_yet_ended,
  already_closed,
  // chat
  self_thread,
  not_participant,
  empty_body,
  too_long,
  // analytics
  too_few_points,
  bad_span,
  // gateway
  rate_limited,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, nlohmann::json details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  Errc code() const noexcept { return code_; }

  // Structured context for the caller, e.g. the current best offer on BidTooLow.
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  Errc code_;
  nlohmann::json details_;
};

}  // namespace fieldlink

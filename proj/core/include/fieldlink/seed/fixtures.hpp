#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "fieldlink/analytics/usage.hpp"
#include "fieldlink/chat/chat.hpp"
#include "fieldlink/diagnosis/diagnosis.hpp"
#include "fieldlink/marketplace/marketplace.hpp"
#include "fieldlink/registry/registry.hpp"

namespace fieldlink::seed {

// Population of a deployment snapshot. The defaults reproduce the
// reference deployment: 146 farmers, 171 chats, 38 samples and so on.
struct UsagePlan {
  std::size_t farmers = 146;
  std::size_t agronomists = 9;
  std::size_t merchants = 12;
  std::size_t chats = 171;
  std::size_t samples = 38;
  std::size_t products = 65;
  std::size_t messages = 1350;
  std::size_t farms = 80;
  std::size_t crops = 275;
};

struct Services {
  registry::Registry& registry;
  chat::ChatService& chat;
  marketplace::MarketplaceService& market;
  diagnosis::DiagnosisService& diagnosis;
  const Clock& clock;
};

inline constexpr std::string_view kFixtureSecret = "fixture-secret";

/// Fills an empty store through the public service operations so that
/// compute_usage_stats reproduces `plan` cell for cell. Users are named
/// farmer-001, agronomist-001, merchant-001, ... with kFixtureSecret.
/// Throws InvalidArgument when the plan cannot be realised (e.g. more chats
/// than distinct user pairs, farms without farmers, crops without farms).
void seed_usage(const Services& services, const UsagePlan& plan = {});

/// `days` consecutive daily download counts starting at `first`: a slow
/// upward drift with a weekly swing and seeded noise.
analytics::TimeSeries seed_downloads(store::DocumentStore& docs, analytics::Day first, std::size_t days = 90,
                                     std::uint64_t seed = 0);

}  // namespace fieldlink::seed

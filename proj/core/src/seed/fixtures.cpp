#include "fieldlink/seed/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "fieldlink/common/error.hpp"
#include "fieldlink/neuralnet/rng.hpp"
#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::seed {

namespace {

std::string numbered(std::string_view prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "-%03zu", i + 1);
  return std::string(prefix) + buf;
}

std::vector<Actor> register_all(registry::Registry& reg, Role role, std::size_t n) {
  std::vector<Actor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto name = numbered(to_string(role), i);
    const registry::Contact contact{"+55 16 9" + std::to_string(10000000 + i * 10 + static_cast<std::size_t>(role)),
                                    "Bebedouro"};
    const auto [user, session] = reg.register_user(name, role, contact, kFixtureSecret);
    out.push_back({user.id, role});
  }
  return out;
}

std::vector<std::uint8_t> leaf_png(std::size_t i) {
  vegindex::RgbImage img(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      img.set(x, y, static_cast<std::uint8_t>(40 + (i * 13 + x * 5) % 120), static_cast<std::uint8_t>(120 + (i * 7 + y * 9) % 120),
              static_cast<std::uint8_t>(30 + (i * 3) % 60));
    }
  }
  return vegindex::encode_png(img);
}

void check(bool ok, const std::string& message) {
  if (!ok) throw Error(Errc::invalid_argument, message);
}

}  // namespace

void seed_usage(const Services& s, const UsagePlan& plan) {
  const std::size_t others = plan.agronomists + plan.merchants;
  check(plan.farms == 0 || plan.farmers > 0, "farms need at least one farmer");
  check(plan.crops == 0 || plan.farms > 0, "crops need at least one farm");
  check(plan.samples == 0 || plan.crops > 0, "samples need at least one crop");
  check(plan.products == 0 || plan.farmers > 0, "products need at least one farmer");
  check(plan.chats <= plan.farmers * others, "more chats than farmer/counterpart pairs");
  check(plan.messages == 0 || plan.chats > 0, "messages need at least one chat");

  const auto farmers = register_all(s.registry, Role::farmer, plan.farmers);
  const auto agronomists = register_all(s.registry, Role::agronomist, plan.agronomists);
  const auto merchants = register_all(s.registry, Role::merchant, plan.merchants);
  std::vector<Actor> counterparts = agronomists;
  counterparts.insert(counterparts.end(), merchants.begin(), merchants.end());

  std::vector<registry::Farm> farms;
  for (std::size_t i = 0; i < plan.farms; ++i) {
    farms.push_back(s.registry.create_farm(farmers[i % farmers.size()], {numbered("Farm", i), "Bebedouro"}));
  }
  static constexpr const char* kKinds[] = {"orange", "tangerine", "Tahiti lime"};
  std::vector<registry::Crop> crops;
  for (std::size_t i = 0; i < plan.crops; ++i) {
    const auto& farm = farms[i % farms.size()];
    crops.push_back(s.registry.create_crop({farm.farmer_id, Role::farmer}, farm.id, {kKinds[i % 3], "2019-03-01", ""}));
  }
  for (std::size_t i = 0; i < plan.samples; ++i) {
    const auto& crop = crops[i % crops.size()];
    s.diagnosis.submit_sample({crop.farmer_id, Role::farmer}, crop.id, leaf_png(i));
  }
  for (std::size_t i = 0; i < plan.products; ++i) {
    marketplace::ListingDetails d;
    d.product_name = std::string(kKinds[i % 3]) + " lot " + std::to_string(i + 1);
    d.quantity = 100.0 + static_cast<double>(i * 25);
    d.unit = "kg";
    d.starting_price = static_cast<marketplace::Money>(10'000 + i * 500);
    d.ends_at = s.clock.now() + std::chrono::days(7) + std::chrono::hours(i);
    s.market.publish_listing(farmers[i % farmers.size()], d);
  }

  // Round r pairs farmer f with counterpart (f + r) mod |counterparts|, so
  // no pair repeats while r < |counterparts|.
  std::vector<std::pair<Actor, std::string>> threads;
  for (std::size_t k = 0; k < plan.chats; ++k) {
    const auto f = k % farmers.size();
    const auto& other = counterparts[(f + k / farmers.size()) % counterparts.size()];
    const auto thread = s.chat.open_thread(farmers[f], other.user_id);
    threads.emplace_back(farmers[f], thread.id);
  }
  std::vector<std::size_t> sent(threads.size(), 0);
  for (std::size_t m = 0; m < plan.messages; ++m) {
    const auto t = m % threads.size();
    const auto& [farmer, thread_id] = threads[t];
    const auto thread = s.chat.thread(thread_id);
    const auto& counterpart_id = thread.participants[0] == farmer.user_id ? thread.participants[1] : thread.participants[0];
    const Actor sender = sent[t] % 2 == 0 ? farmer : Actor{counterpart_id, s.registry.user(counterpart_id).role};
    s.chat.send_message(sender, thread_id, "message " + std::to_string(++sent[t]));
  }
}

analytics::TimeSeries seed_downloads(store::DocumentStore& docs, analytics::Day first, std::size_t days,
                                     std::uint64_t seed) {
  auto rng = neuralnet::derive_rng(seed, 0x646f776e);
  analytics::TimeSeries out;
  for (std::size_t i = 0; i < days; ++i) {
    const double t = static_cast<double>(i);
    const double noise = neuralnet::uniform(rng, -4.0, 4.0);
    const double value = 12.0 + 0.25 * t + 5.0 * std::sin(2.0 * std::numbers::pi * t / 7.0) + noise;
    out = analytics::record_download(docs, first + std::chrono::days(i),
                                     static_cast<std::uint64_t>(std::max(0.0, std::round(value))));
  }
  return out;
}

}  // namespace fieldlink::seed

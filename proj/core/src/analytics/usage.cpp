#include "fieldlink/analytics/usage.hpp"

#include <cstdio>

#include "fieldlink/common/error.hpp"
#include "fieldlink/store/collections.hpp"

namespace fieldlink::analytics {

namespace cols = store::collections;
using nlohmann::json;

UsageStats compute_usage_stats(const store::DocumentStore& docs) {
  UsageStats s;
  for (const auto& u : docs.list(cols::users)) {
    const auto role = u.payload.at("role").get<std::string>();
    if (role == "farmer") ++s.farmers;
    if (role == "agronomist") ++s.agronomists;
    if (role == "merchant") ++s.merchants;
  }
  s.total_users = s.farmers + s.agronomists + s.merchants;
  s.chats = docs.count(cols::threads);
  s.samples = docs.count(cols::samples);
  s.products = docs.count(cols::listings);
  s.messages = docs.count(cols::messages);
  s.farms = docs.count(cols::farms);
  s.crops = docs.count(cols::crops);
  return s;
}

json to_json(const UsageStats& s) {
  return {{"total_users", s.total_users}, {"farmers", s.farmers}, {"agronomists", s.agronomists},
          {"merchants", s.merchants},     {"chats", s.chats},     {"samples", s.samples},
          {"products", s.products},       {"messages", s.messages}, {"farms", s.farms},
          {"crops", s.crops}};
}

Day parse_day(std::string_view text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  int consumed = 0;
  const std::string s(text);
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%n", &y, &m, &d, &consumed) != 3 || consumed != 10) {
    throw Error(Errc::invalid_argument, "expected a YYYY-MM-DD day, got '" + s + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw Error(Errc::invalid_argument, "not a calendar day: '" + s + "'");
  return Day(ymd);
}

std::string format_day(Day day) {
  const std::chrono::year_month_day ymd(day);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

TimeSeries record_download(store::DocumentStore& docs, Day day, std::uint64_t n) {
  store::update_with_retry(docs, cols::downloads, format_day(day), [&](json p) {
    if (p.is_null()) p = {{"day", day.time_since_epoch().count()}, {"count", 0}};
    p["count"] = p.at("count").get<std::uint64_t>() + n;
    return p;
  });
  return download_series(docs);
}

TimeSeries download_series(const store::DocumentStore& docs) {
  TimeSeries out;
  // Ids are ISO dates, so id order is day order.
  for (const auto& doc : docs.list(cols::downloads)) {
    out.push_back({Day(std::chrono::days(doc.payload.at("day").get<std::int64_t>())),
                   doc.payload.at("count").get<std::uint64_t>()});
  }
  return out;
}

json to_json(const TimeSeries& series) {
  json out = json::array();
  for (const auto& p : series) out.push_back({{"day", format_day(p.day)}, {"count", p.count}});
  return out;
}

}  // namespace fieldlink::analytics

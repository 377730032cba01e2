#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldlink/store/document_store.hpp"

namespace fieldlink::analytics {

struct UsageStats {
  std::uint64_t total_users = 0;
  std::uint64_t farmers = 0;
  std::uint64_t agronomists = 0;
  std::uint64_t merchants = 0;
  std::uint64_t chats = 0;
  std::uint64_t samples = 0;
  std::uint64_t products = 0;
  std::uint64_t messages = 0;
  std::uint64_t farms = 0;
  std::uint64_t crops = 0;

  friend bool operator==(const UsageStats&, const UsageStats&) = default;
};

/// Exact counts from a scan of the store.
UsageStats compute_usage_stats(const store::DocumentStore& docs);

nlohmann::json to_json(const UsageStats& s);

using Day = std::chrono::sys_days;

struct DayCount {
  Day day;
  std::uint64_t count = 0;

  friend bool operator==(const DayCount&, const DayCount&) = default;
};

// Day-sorted, strictly increasing days.
using TimeSeries = std::vector<DayCount>;

/// "YYYY-MM-DD"; throws InvalidArgument for anything that is not a real date.
Day parse_day(std::string_view text);
std::string format_day(Day day);

/// Adds `n` to the day's download counter. Returns the full series.
TimeSeries record_download(store::DocumentStore& docs, Day day, std::uint64_t n = 1);
TimeSeries download_series(const store::DocumentStore& docs);

nlohmann::json to_json(const TimeSeries& series);

}  // namespace fieldlink::analytics

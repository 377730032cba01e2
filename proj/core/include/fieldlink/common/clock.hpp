#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace fieldlink {

using Millis = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Millis>;

inline std::int64_t to_epoch_ms(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_epoch_ms(std::int64_t ms) { return Timestamp{Millis{ms}}; }

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

// Test clock; starts at a fixed instant and only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = from_epoch_ms(1'700'000'000'000)) : ms_(to_epoch_ms(start)) {}

  Timestamp now() const override { return from_epoch_ms(ms_.load()); }
  void set(Timestamp t) { ms_.store(to_epoch_ms(t)); }
  void advance(Millis d) { ms_.fetch_add(d.count()); }

 private:
  std::atomic<std::int64_t> ms_;
};

}  // namespace fieldlink

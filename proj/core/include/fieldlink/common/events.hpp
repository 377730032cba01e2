#pragma once

#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fieldlink {

// A fact some module wants pushed to live clients. `topic` is the entity id
// the event concerns; `recipients` are user ids addressed directly.
struct Event {
  std::string type;
  std::string topic;
  std::vector<std::string> recipients;
  nlohmann::json payload;
};

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void publish(const Event& event) = 0;
};

class NullEventSink final : public EventSink {
 public:
  void publish(const Event&) override {}
};

// Keeps every published event; used by tests and offline tools.
class EventLog final : public EventSink {
 public:
  void publish(const Event& event) override {
    std::lock_guard lock(mu_);
    events_.push_back(event);
  }

  std::vector<Event> events() const {
    std::lock_guard lock(mu_);
    return events_;
  }

  std::size_t count(const std::string& type, const std::string& recipient) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& e : events_) {
      if (e.type != type) continue;
      for (const auto& r : e.recipients) n += (r == recipient);
    }
    return n;
  }

  void clear() {
    std::lock_guard lock(mu_);
    events_.clear();
  }

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
};

}  // namespace fieldlink

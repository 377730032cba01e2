#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fieldlink/gateway/frame.hpp"

namespace fieldlink::gateway {

// Blocking client for the realtime channel, used by tests and tools.
// Frames are read on a background thread. Replies to subscribe and
// unsubscribe are kept apart from event frames.
class RealtimeClient {
 public:
  /// Throws IoError when the connection or upgrade fails.
  RealtimeClient(const std::string& host, std::uint16_t port, const std::string& token);
  ~RealtimeClient();

  RealtimeClient(const RealtimeClient&) = delete;
  RealtimeClient& operator=(const RealtimeClient&) = delete;

  /// Waits for the reply. Throws Forbidden when refused, IoError on timeout.
  void subscribe(const std::string& topic, std::chrono::milliseconds timeout = std::chrono::seconds(5));
  void unsubscribe(const std::string& topic, std::chrono::milliseconds timeout = std::chrono::seconds(5));

  /// Next event frame, or nullopt after `timeout`.
  std::optional<Frame> next_frame(std::chrono::milliseconds timeout);
  /// Every event frame that arrives within `quiet` of the previous one.
  std::vector<Frame> drain(std::chrono::milliseconds quiet);

  /// seq of every frame received so far, control replies included.
  std::vector<std::uint64_t> received_seqs() const;

  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fieldlink::gateway

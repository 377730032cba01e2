#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fieldlink/common/actor.hpp"
#include "fieldlink/common/events.hpp"
#include "fieldlink/gateway/frame.hpp"

namespace fieldlink::gateway {

// Outbound side of one live connection. send() must not block; it receives
// fully encoded frames in delivery order.
class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void send(std::string encoded) = 0;
};

// Fans module events out to live connections.
//
// A connection receives an event when it is subscribed to the event's topic
// or its user is one of the recipients, at most once per event. Each
// connection numbers its frames 1, 2, 3, ... in the order it is handed them.
// Offline users get nothing; delivery is at most once.
class Hub final : public EventSink {
 public:
  using ConnectionId = std::uint64_t;
  /// Decides whether `actor` may follow `topic`.
  using TopicPolicy = std::function<bool(const Actor& actor, std::string_view topic)>;

  explicit Hub(TopicPolicy policy);

  ConnectionId attach(const Actor& actor, std::shared_ptr<FrameSink> sink);
  void detach(ConnectionId id);
  void detach_all();

  /// Replies on the connection with rt.subscribed, or rt.error when the
  /// policy denies the topic (the subscription is then not recorded).
  /// Returns whether the subscription was recorded.
  bool subscribe(ConnectionId id, std::string_view topic);
  void unsubscribe(ConnectionId id, std::string_view topic);

  /// Handles one client frame (subscribe / unsubscribe); anything else gets
  /// an rt.error reply.
  void handle_client_frame(ConnectionId id, const Frame& frame);

  void publish(const Event& event) override;

  std::size_t connection_count() const;
  bool online(std::string_view user_id) const;

 private:
  struct Connection {
    Actor actor;
    std::shared_ptr<FrameSink> sink;
    std::mutex mu;  // orders seq assignment with the hand-off to the sink
    std::uint64_t next_seq = 1;
    std::set<std::string, std::less<>> topics;
  };

  std::shared_ptr<Connection> find(ConnectionId id) const;
  static void deliver(Connection& c, std::string_view type, std::string_view topic, const nlohmann::json& payload);

  TopicPolicy policy_;
  mutable std::shared_mutex mu_;
  std::map<ConnectionId, std::shared_ptr<Connection>> connections_;
  ConnectionId next_id_ = 1;
};

}  // namespace fieldlink::gateway

#include "fieldlink/gateway/hub.hpp"

#include <algorithm>

namespace fieldlink::gateway {

Hub::Hub(TopicPolicy policy) : policy_(std::move(policy)) {}

Hub::ConnectionId Hub::attach(const Actor& actor, std::shared_ptr<FrameSink> sink) {
  auto c = std::make_shared<Connection>();
  c->actor = actor;
  c->sink = std::move(sink);
  std::unique_lock lock(mu_);
  const auto id = next_id_++;
  connections_.emplace(id, std::move(c));
  return id;
}

void Hub::detach(ConnectionId id) {
  std::unique_lock lock(mu_);
  connections_.erase(id);
}

void Hub::detach_all() {
  std::unique_lock lock(mu_);
  connections_.clear();
}

std::shared_ptr<Hub::Connection> Hub::find(ConnectionId id) const {
  std::shared_lock lock(mu_);
  const auto it = connections_.find(id);
  return it == connections_.end() ? nullptr : it->second;
}

void Hub::deliver(Connection& c, std::string_view type, std::string_view topic, const nlohmann::json& payload) {
  // Caller holds c.mu.
  Frame f{std::string(type), std::string(topic), c.next_seq++, payload};
  c.sink->send(encode_frame(f));
}

bool Hub::subscribe(ConnectionId id, std::string_view topic) {
  const auto c = find(id);
  if (!c) return false;
  const bool allowed = !topic.empty() && policy_(c->actor, topic);
  std::lock_guard lock(c->mu);
  if (!allowed) {
    deliver(*c, kRtError, topic, {{"code", "Forbidden"}, {"message", "topic is not visible to this session"}});
    return false;
  }
  c->topics.emplace(topic);
  deliver(*c, kSubscribed, topic, nlohmann::json::object());
  return true;
}

void Hub::unsubscribe(ConnectionId id, std::string_view topic) {
  const auto c = find(id);
  if (!c) return;
  std::lock_guard lock(c->mu);
  if (const auto it = c->topics.find(topic); it != c->topics.end()) c->topics.erase(it);
  deliver(*c, kUnsubscribed, topic, nlohmann::json::object());
}

void Hub::handle_client_frame(ConnectionId id, const Frame& frame) {
  if (frame.type == kSubscribe) {
    subscribe(id, frame.topic);
  } else if (frame.type == kUnsubscribe) {
    unsubscribe(id, frame.topic);
  } else if (const auto c = find(id)) {
    std::lock_guard lock(c->mu);
    deliver(*c, kRtError, frame.topic, {{"code", "FormatError"}, {"message", "clients may only send rt.subscribe or rt.unsubscribe"}});
  }
}

void Hub::publish(const Event& event) {
  std::vector<std::shared_ptr<Connection>> targets;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, c] : connections_) {
      const bool addressed =
          std::find(event.recipients.begin(), event.recipients.end(), c->actor.user_id) != event.recipients.end();
      if (addressed) {
        targets.push_back(c);
        continue;
      }
      std::lock_guard clock(c->mu);
      if (c->topics.contains(event.topic)) targets.push_back(c);
    }
  }
  for (const auto& c : targets) {
    std::lock_guard lock(c->mu);
    deliver(*c, event.type, event.topic, event.payload);
  }
}

std::size_t Hub::connection_count() const {
  std::shared_lock lock(mu_);
  return connections_.size();
}

bool Hub::online(std::string_view user_id) const {
  std::shared_lock lock(mu_);
  return std::any_of(connections_.begin(), connections_.end(),
                     [&](const auto& entry) { return entry.second->actor.user_id == user_id; });
}

}  // namespace fieldlink::gateway

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldlink/common/actor.hpp"
#include "fieldlink/common/clock.hpp"
#include "fieldlink/common/events.hpp"
#include "fieldlink/common/striped_mutex.hpp"
#include "fieldlink/registry/registry.hpp"
#include "fieldlink/store/document_store.hpp"

namespace fieldlink::chat {

inline constexpr std::size_t kMaxBodyLength = 4096;  // Unicode code points
inline constexpr std::string_view kMessageEvent = "chat.message";

struct Thread {
  std::string id;
  std::array<std::string, 2> participants;  // sorted
  Timestamp created_at;
  std::uint64_t last_seq = 0;
};

struct Message {
  std::string thread_id;
  std::string sender_id;
  std::string body;
  std::uint64_t seq = 0;
  Timestamp sent_at;
};

struct ThreadSummary {
  Thread thread;
  std::string counterpart_id;
  std::uint64_t unread = 0;
};

nlohmann::json to_json(const Thread& t);
nlohmann::json to_json(const Message& m);
nlohmann::json to_json(const ThreadSummary& s);

/// Thread id for an unordered pair of users.
std::string thread_id_for(std::string_view a, std::string_view b);

/// Number of code points in a UTF-8 string (bytes that are not continuation bytes).
std::size_t utf8_length(std::string_view text);

// Pairwise threads with per-thread sequence numbers starting at 1.
class ChatService {
 public:
  ChatService(store::DocumentStore& docs, const registry::Registry& registry, EventSink& events, const Clock& clock);

  /// Idempotent per unordered pair. Throws SelfThread, UnknownUser.
  Thread open_thread(const Actor& actor, std::string_view other_user_id);

  /// Throws NotFound, NotParticipant, EmptyBody, TooLong.
  Message send_message(const Actor& actor, std::string_view thread_id, std::string_view body);

  /// Messages with seq > after, ascending, at most `limit`. Advances the
  /// caller's read marker. Throws NotFound, NotParticipant.
  std::vector<Message> fetch_history(const Actor& actor, std::string_view thread_id, std::uint64_t after,
                                     std::size_t limit = std::numeric_limits<std::size_t>::max());

  /// Threads the caller takes part in, with unread counts (max seq minus the
  /// highest fetched seq).
  std::vector<ThreadSummary> threads_of(const Actor& actor) const;

  /// Throws NotFound.
  Thread thread(std::string_view thread_id) const;
  bool is_participant(std::string_view user_id, std::string_view thread_id) const;

 private:
  Thread participant_thread(const Actor& actor, std::string_view thread_id) const;

  store::DocumentStore& docs_;
  const registry::Registry& registry_;
  EventSink& events_;
  const Clock& clock_;
  StripedMutex<> thread_locks_;
};

}  // namespace fieldlink::chat

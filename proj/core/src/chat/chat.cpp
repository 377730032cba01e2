#include "fieldlink/chat/chat.hpp"

#include <algorithm>
#include <cstdio>

#include "fieldlink/common/crypto.hpp"
#include "fieldlink/common/error.hpp"
#include "fieldlink/store/collections.hpp"

namespace fieldlink::chat {

namespace cols = store::collections;
using nlohmann::json;

namespace {

std::string message_id(std::string_view thread_id, std::uint64_t seq) {
  char buf[24];
  std::snprintf(buf, sizeof buf, ":%010llu", static_cast<unsigned long long>(seq));
  return std::string(thread_id) + buf;
}

Thread thread_from(const store::Document& doc) {
  const auto& p = doc.payload;
  return {doc.id,
          {p.at("participants").at(0).get<std::string>(), p.at("participants").at(1).get<std::string>()},
          from_epoch_ms(p.at("created_at").get<std::int64_t>()),
          p.at("last_seq").get<std::uint64_t>()};
}

Message message_from(const json& p) {
  return {p.at("thread_id").get<std::string>(), p.at("sender_id").get<std::string>(), p.at("body").get<std::string>(),
          p.at("seq").get<std::uint64_t>(), from_epoch_ms(p.at("sent_at").get<std::int64_t>())};
}

bool contains(const Thread& t, std::string_view user) { return t.participants[0] == user || t.participants[1] == user; }

const std::string& other(const Thread& t, std::string_view user) {
  return t.participants[0] == user ? t.participants[1] : t.participants[0];
}

}  // namespace

json to_json(const Thread& t) {
  return {{"id", t.id},
          {"participants", t.participants},
          {"created_at", to_epoch_ms(t.created_at)},
          {"last_seq", t.last_seq}};
}

json to_json(const Message& m) {
  return {{"thread_id", m.thread_id},
          {"sender_id", m.sender_id},
          {"body", m.body},
          {"seq", m.seq},
          {"sent_at", to_epoch_ms(m.sent_at)}};
}

json to_json(const ThreadSummary& s) {
  auto j = to_json(s.thread);
  j["counterpart_id"] = s.counterpart_id;
  j["unread"] = s.unread;
  return j;
}

std::string thread_id_for(std::string_view a, std::string_view b) {
  const auto [lo, hi] = std::minmax(a, b);
  const std::string key = std::string(lo) + '\n' + std::string(hi);
  return "th_" + sha256_hex(as_bytes(key)).substr(0, 16);
}

std::size_t utf8_length(std::string_view text) {
  return static_cast<std::size_t>(
      std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

ChatService::ChatService(store::DocumentStore& docs, const registry::Registry& registry, EventSink& events,
                         const Clock& clock)
    : docs_(docs), registry_(registry), events_(events), clock_(clock) {}

Thread ChatService::open_thread(const Actor& actor, std::string_view other_user_id) {
  if (actor.user_id == other_user_id) throw Error(Errc::self_thread, "cannot open a thread with yourself");
  registry_.user(actor.user_id);
  registry_.user(other_user_id);
  const auto id = thread_id_for(actor.user_id, other_user_id);
  if (auto existing = docs_.find(cols::threads, id)) return thread_from(*existing);

  const auto [lo, hi] = std::minmax(std::string_view(actor.user_id), other_user_id);
  json payload = {{"participants", {lo, hi}},
                  {"created_at", to_epoch_ms(clock_.now())},
                  {"last_seq", 0},
                  {"read", {{std::string(lo), 0}, {std::string(hi), 0}}}};
  try {
    docs_.put_cas(cols::threads, id, 0, payload);
  } catch (const Error& e) {
    if (e.code() != Errc::version_conflict) throw;
    // The counterpart opened it concurrently.
  }
  return thread_from(docs_.get(cols::threads, id));
}

Thread ChatService::thread(std::string_view thread_id) const {
  return thread_from(docs_.get(cols::threads, thread_id));
}

bool ChatService::is_participant(std::string_view user_id, std::string_view thread_id) const {
  const auto doc = docs_.find(cols::threads, thread_id);
  return doc && contains(thread_from(*doc), user_id);
}

Thread ChatService::participant_thread(const Actor& actor, std::string_view thread_id) const {
  auto t = thread(thread_id);
  if (!contains(t, actor.user_id)) throw Error(Errc::not_participant, "not a participant of " + t.id);
  return t;
}

Message ChatService::send_message(const Actor& actor, std::string_view thread_id, std::string_view body) {
  auto t = participant_thread(actor, thread_id);
  if (body.empty()) throw Error(Errc::empty_body, "message body must not be empty");
  const auto length = utf8_length(body);
  if (length > kMaxBodyLength) {
    throw Error(Errc::too_long, "message body exceeds " + std::to_string(kMaxBodyLength) + " characters",
                {{"length", length}});
  }

  // Sequence claim, persistence and publication happen under one lock so the
  // realtime stream for a thread leaves in sequence order.
  std::lock_guard lock(thread_locks_.for_key(t.id));
  t = thread(t.id);
  Message msg{t.id, actor.user_id, std::string(body), t.last_seq + 1, clock_.now()};
  // Creating the message document is the atomic claim on its sequence number.
  for (;;) {
    try {
      docs_.put_cas(cols::messages, message_id(t.id, msg.seq), 0, to_json(msg));
      break;
    } catch (const Error& e) {
      if (e.code() != Errc::version_conflict) throw;
      ++msg.seq;
    }
  }
  store::update_with_retry(docs_, cols::threads, t.id, [&](json p) {
    p["last_seq"] = std::max(p.at("last_seq").get<std::uint64_t>(), msg.seq);
    return p;
  });
  events_.publish({std::string(kMessageEvent), t.id, {other(t, actor.user_id)}, to_json(msg)});
  return msg;
}

std::vector<Message> ChatService::fetch_history(const Actor& actor, std::string_view thread_id, std::uint64_t after,
                                                std::size_t limit) {
  const auto t = participant_thread(actor, thread_id);
  std::vector<Message> page;
  for (std::uint64_t seq = after + 1; seq <= t.last_seq && page.size() < limit; ++seq) {
    const auto doc = docs_.find(cols::messages, message_id(t.id, seq));
    if (!doc) break;
    page.push_back(message_from(doc->payload));
  }
  if (!page.empty()) {
    const auto upto = page.back().seq;
    store::update_with_retry(docs_, cols::threads, t.id, [&](json p) {
      auto& marker = p["read"][actor.user_id];
      if (!marker.is_number_unsigned() || marker.get<std::uint64_t>() < upto) marker = upto;
      return p;
    });
  }
  return page;
}

std::vector<ThreadSummary> ChatService::threads_of(const Actor& actor) const {
  std::vector<ThreadSummary> out;
  for (const auto& doc : docs_.list(cols::threads)) {
    const auto t = thread_from(doc);
    if (!contains(t, actor.user_id)) continue;
    std::uint64_t read = 0;
    const auto& markers = doc.payload.at("read");
    if (markers.contains(actor.user_id)) read = markers.at(actor.user_id).get<std::uint64_t>();
    out.push_back({t, other(t, actor.user_id), t.last_seq > read ? t.last_seq - read : 0});
  }
  return out;
}

}  // namespace fieldlink::chat

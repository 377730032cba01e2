#include "fieldlink/gateway/frame.hpp"

#include <algorithm>
#include <array>

#include "fieldlink/chat/chat.hpp"
#include "fieldlink/common/error.hpp"
#include "fieldlink/diagnosis/diagnosis.hpp"
#include "fieldlink/marketplace/marketplace.hpp"

namespace fieldlink::gateway {

namespace {

constexpr std::array<std::string_view, 13> kCatalog = {
    chat::kMessageEvent,         marketplace::kOfferEvent,    marketplace::kOutbidEvent,
    marketplace::kClosedEvent,   diagnosis::kProcessedEvent,  diagnosis::kQueuedEvent,
    diagnosis::kAssignedEvent,   diagnosis::kReportEvent,     kSubscribe,
    kUnsubscribe,                kSubscribed,                 kUnsubscribed,
    kRtError,
};

}  // namespace

bool is_registered_type(std::string_view type) noexcept {
  return std::find(kCatalog.begin(), kCatalog.end(), type) != kCatalog.end();
}

nlohmann::json to_json(const Frame& f) {
  return {{"type", f.type}, {"topic", f.topic}, {"seq", f.seq}, {"payload", f.payload}};
}

std::string encode_frame(const Frame& f) {
  const auto body = to_json(f).dump();
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(body.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>(n & 0xFF));
  out += body;
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(Errc::format_error, "frame shorter than its length prefix");
  const std::uint32_t n = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                          (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
  if (n != bytes.size() - 4) {
    throw Error(Errc::format_error, "frame length prefix " + std::to_string(n) + " does not match body length " +
                                        std::to_string(bytes.size() - 4));
  }
  const auto j = nlohmann::json::parse(bytes.begin() + 4, bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::format_error, "frame body is not a JSON object");
  Frame f;
  try {
    f.type = j.at("type").get<std::string>();
    f.topic = j.value("topic", "");
    f.seq = j.value("seq", std::uint64_t{0});
    f.payload = j.value("payload", nlohmann::json());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format_error, std::string("malformed frame: ") + e.what());
  }
  if (!is_registered_type(f.type)) throw Error(Errc::format_error, "unregistered frame type '" + f.type + "'");
  return f;
}

Frame decode_frame(std::string_view bytes) {
  return decode_frame(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

}  // namespace fieldlink::gateway

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace fieldlink::gateway {

// One message on the realtime channel. On the wire: a 4-byte big-endian
// length followed by that many bytes of canonical (key-sorted) JSON.
struct Frame {
  std::string type;
  std::string topic;
  std::uint64_t seq = 0;
  nlohmann::json payload;
};

// Client -> server.
inline constexpr std::string_view kSubscribe = "rt.subscribe";
inline constexpr std::string_view kUnsubscribe = "rt.unsubscribe";
// Server -> client replies.
inline constexpr std::string_view kSubscribed = "rt.subscribed";
inline constexpr std::string_view kUnsubscribed = "rt.unsubscribed";
inline constexpr std::string_view kRtError = "rt.error";

/// True for every frame type the server emits or accepts.
bool is_registered_type(std::string_view type) noexcept;

nlohmann::json to_json(const Frame& f);
std::string encode_frame(const Frame& f);
/// Throws FormatError for a bad length prefix, malformed JSON, or an
/// unregistered type.
Frame decode_frame(std::span<const std::uint8_t> bytes);
Frame decode_frame(std::string_view bytes);

}  // namespace fieldlink::gateway

#pragma once

#include <string_view>

// Collection names shared by the services and the integrity checker.
namespace fieldlink::store::collections {

inline constexpr std::string_view users = "users";
inline constexpr std::string_view usernames = "usernames";
inline constexpr std::string_view sessions = "sessions";
inline constexpr std::string_view farms = "farms";
inline constexpr std::string_view crops = "crops";
inline constexpr std::string_view samples = "samples";
inline constexpr std::string_view requests = "diagnosis_requests";
inline constexpr std::string_view reports = "diagnosis_reports";
inline constexpr std::string_view listings = "listings";
inline constexpr std::string_view offers = "offers";
inline constexpr std::string_view purchases = "purchases";
inline constexpr std::string_view threads = "chat_threads";
inline constexpr std::string_view messages = "chat_messages";
inline constexpr std::string_view downloads = "downloads";

}  // namespace fieldlink::store::collections

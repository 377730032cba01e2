#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fieldlink {

enum class Role { farmer, agronomist, merchant };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

// The authenticated caller of a domain operation.
struct Actor {
  std::string user_id;
  Role role;
};

}  // namespace fieldlink

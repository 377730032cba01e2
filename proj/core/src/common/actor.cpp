#include "fieldlink/common/actor.hpp"

namespace fieldlink {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::farmer: return "farmer";
    case Role::agronomist: return "agronomist";
    case Role::merchant: return "merchant";
  }
  return "unknown";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  if (text == "farmer") return Role::farmer;
  if (text == "agronomist") return Role::agronomist;
  if (text == "merchant") return Role::merchant;
  return std::nullopt;
}

}  // namespace fieldlink

#pragma once

#include <array>
#include <functional>
#include <mutex>
#include <string_view>

namespace fieldlink {

// Fixed pool of mutexes selected by key hash. Two keys may share a stripe,
// which only costs concurrency, never correctness.
template <std::size_t N = 64>
class StripedMutex {
 public:
  std::mutex& for_key(std::string_view key) { return stripes_[std::hash<std::string_view>{}(key) % N]; }

 private:
  std::array<std::mutex, N> stripes_;
};

}  // namespace fieldlink

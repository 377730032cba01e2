#include "fieldlink/common/clock.hpp"

namespace fieldlink {

Timestamp SystemClock::now() const {
  return std::chrono::time_point_cast<Millis>(std::chrono::system_clock::now());
}

}  // namespace fieldlink

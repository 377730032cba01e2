#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "fieldlink/gateway/api.hpp"
#include "fieldlink/gateway/hub.hpp"

namespace fieldlink::gateway {

inline constexpr std::size_t kMaxRequestBody = 32u << 20;

// HTTP/1.1 server for the API plus the realtime channel at /api/v1/rt,
// upgraded to a WebSocket. Each binary WebSocket message carries exactly
// one length-prefixed frame. The session token comes from `?token=` or an
// Authorization: Bearer header.
class Server {
 public:
  Server(Api& api, Hub& hub, std::string address, std::uint16_t port, unsigned threads);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the I/O threads. Port 0 picks a free port.
  void start();
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  std::uint16_t port() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fieldlink::gateway

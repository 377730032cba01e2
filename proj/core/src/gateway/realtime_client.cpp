#include "fieldlink/gateway/realtime_client.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "fieldlink/common/error.hpp"

namespace fieldlink::gateway {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct RealtimeClient::Impl {
  net::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  beast::flat_buffer buffer;
  std::thread io_thread;

  mutable std::mutex mu;
  std::condition_variable cv;
  std::deque<Frame> events;
  std::deque<Frame> control;
  std::vector<std::uint64_t> seqs;
  bool closed = false;

  std::deque<std::string> outbox;
  bool writing = false;

  void read_next() {
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      if (ec) {
        std::lock_guard lock(mu);
        closed = true;
        cv.notify_all();
        return;
      }
      const auto data = beast::buffers_to_string(buffer.data());
      buffer.consume(buffer.size());
      {
        std::lock_guard lock(mu);
        try {
          auto frame = decode_frame(data);
          seqs.push_back(frame.seq);
          if (frame.type.rfind("rt.", 0) == 0) {
            control.push_back(std::move(frame));
          } else {
            events.push_back(std::move(frame));
          }
        } catch (const Error&) {
          closed = true;
        }
        cv.notify_all();
      }
      read_next();
    });
  }

  // Runs on the io thread only.
  void write_next() {
    if (outbox.empty()) {
      writing = false;
      return;
    }
    writing = true;
    ws.async_write(net::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      outbox.pop_front();
      if (ec) {
        outbox.clear();
        writing = false;
        return;
      }
      write_next();
    });
  }

  void send(const Frame& frame) {
    net::post(ioc, [this, data = encode_frame(frame)]() mutable {
      outbox.push_back(std::move(data));
      if (!writing) write_next();
    });
  }

  void await_reply(const std::string& expected, const std::string& topic, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      for (auto it = control.begin(); it != control.end(); ++it) {
        if (it->topic != topic) continue;
        const Frame reply = *it;
        control.erase(it);
        if (reply.type == expected) return;
        const auto message = reply.payload.value("message", std::string("refused"));
        throw Error(Errc::forbidden, "topic '" + topic + "': " + message, reply.payload);
      }
      if (closed) throw Error(Errc::io_error, "realtime connection closed");
      if (cv.wait_until(lock, deadline) == std::cv_status::timeout) {
        throw Error(Errc::io_error, "no reply for topic '" + topic + "'");
      }
    }
  }
};

RealtimeClient::RealtimeClient(const std::string& host, std::uint16_t port, const std::string& token)
    : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  try {
    tcp::resolver resolver(s.ioc);
    net::connect(s.ws.next_layer(), resolver.resolve(host, std::to_string(port)));
    s.ws.binary(true);
    s.ws.handshake(host + ":" + std::to_string(port), "/api/v1/rt?token=" + token);
  } catch (const boost::system::system_error& e) {
    throw Error(Errc::io_error, std::string("realtime connect failed: ") + e.what());
  }
  s.read_next();
  s.io_thread = std::thread([&s] { s.ioc.run(); });
}

RealtimeClient::~RealtimeClient() { close(); }

void RealtimeClient::subscribe(const std::string& topic, std::chrono::milliseconds timeout) {
  impl_->send(Frame{std::string(kSubscribe), topic, 0, nlohmann::json::object()});
  impl_->await_reply(std::string(kSubscribed), topic, timeout);
}

void RealtimeClient::unsubscribe(const std::string& topic, std::chrono::milliseconds timeout) {
  impl_->send(Frame{std::string(kUnsubscribe), topic, 0, nlohmann::json::object()});
  impl_->await_reply(std::string(kUnsubscribed), topic, timeout);
}

std::optional<Frame> RealtimeClient::next_frame(std::chrono::milliseconds timeout) {
  auto& s = *impl_;
  std::unique_lock lock(s.mu);
  if (!s.cv.wait_for(lock, timeout, [&] { return !s.events.empty() || s.closed; })) return std::nullopt;
  if (s.events.empty()) return std::nullopt;
  Frame f = std::move(s.events.front());
  s.events.pop_front();
  return f;
}

std::vector<Frame> RealtimeClient::drain(std::chrono::milliseconds quiet) {
  std::vector<Frame> out;
  while (auto f = next_frame(quiet)) out.push_back(std::move(*f));
  return out;
}

std::vector<std::uint64_t> RealtimeClient::received_seqs() const {
  std::lock_guard lock(impl_->mu);
  return impl_->seqs;
}

void RealtimeClient::close() {
  auto& s = *impl_;
  if (!s.io_thread.joinable()) return;
  net::post(s.ioc, [&s] {
    s.ws.async_close(websocket::close_code::normal, [&s](beast::error_code) {
      beast::error_code ec;
      s.ws.next_layer().close(ec);
    });
  });
  // A peer that never answers the close handshake must not hang us.
  {
    std::unique_lock lock(s.mu);
    s.cv.wait_for(lock, std::chrono::seconds(2), [&] { return s.closed; });
  }
  s.ioc.stop();
  s.io_thread.join();
}

}  // namespace fieldlink::gateway

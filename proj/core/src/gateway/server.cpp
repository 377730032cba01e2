#include "fieldlink/gateway/server.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio/bind_executor.hpp>
#include <boost/asio/dispatch.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "fieldlink/common/error.hpp"

namespace fieldlink::gateway {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::string_view kRealtimePath = "/api/v1/rt";

class WsSession final : public FrameSink, public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Hub& hub, Actor actor) : ws_(std::move(socket)), hub_(hub), actor_(std::move(actor)) {}

  void accept(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.binary(true);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void send(std::string encoded) override {
    std::lock_guard lock(mu_);
    if (closed_) return;
    outbox_.push_back(std::move(encoded));
    if (writing_) return;
    writing_ = true;
    net::post(ws_.get_executor(), beast::bind_front_handler(&WsSession::write_next, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    id_ = hub_.attach(actor_, shared_from_this());
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      shut();
      return;
    }
    const auto data = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      hub_.handle_client_frame(id_, decode_frame(data));
    } catch (const Error&) {
      // Undecodable input is answered like any other unsupported frame.
      hub_.handle_client_frame(id_, Frame{});
    }
    read_next();
  }

  void write_next() {
    std::string* front = nullptr;
    {
      std::lock_guard lock(mu_);
      if (closed_ || outbox_.empty()) {
        writing_ = false;
        return;
      }
      front = &outbox_.front();
    }
    // Deque elements stay put while later ones are appended.
    ws_.async_write(net::buffer(*front), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    {
      std::lock_guard lock(mu_);
      outbox_.pop_front();
    }
    if (ec) {
      shut();
      return;
    }
    write_next();
  }

  void shut() {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      closed_ = true;
      outbox_.clear();
    }
    if (id_ != 0) hub_.detach(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  Hub& hub_;
  Actor actor_;
  Hub::ConnectionId id_ = 0;
  std::mutex mu_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpSession final : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Api& api, Hub& hub) : stream_(std::move(socket)), api_(api), hub_(hub) {}

  void run() { net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read_next, shared_from_this())); }

 private:
  void read_next() {
    parser_.emplace();
    parser_->body_limit(kMaxRequestBody);
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    auto req = parser_->release();

    std::string path;
    std::map<std::string, std::string> query;
    parse_target(std::string_view(req.target().data(), req.target().size()), path, query);

    if (path == kRealtimePath && websocket::is_upgrade(req)) {
      upgrade(std::move(req), query);
      return;
    }

    ApiRequest api_req;
    api_req.method = std::string(req.method_string());
    api_req.path = std::move(path);
    api_req.query = std::move(query);
    api_req.authorization = std::string(req[http::field::authorization]);
    api_req.content_type = std::string(req[http::field::content_type]);
    api_req.body = std::move(req.body());
    const auto result = api_.handle(api_req);

    auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(result.status),
                                                                    req.version());
    res->set(http::field::server, "fieldlink");
    res->set(http::field::content_type, result.content_type);
    res->keep_alive(req.keep_alive());
    res->body() = result.body;
    res->prepare_payload();
    write(res);
  }

  void upgrade(http::request<http::string_body> req, const std::map<std::string, std::string>& query) {
    std::string token;
    if (const auto it = query.find("token"); it != query.end()) token = it->second;
    if (token.empty()) token = bearer_token(std::string_view(req[http::field::authorization].data(), req[http::field::authorization].size()));
    Actor actor;
    try {
      actor = api_.authenticate(token, Endpoint::realtime);
    } catch (const Error& e) {
      auto res = std::make_shared<http::response<http::string_body>>(
          static_cast<http::status>(http_status(e.code())), req.version());
      res->set(http::field::content_type, "application/json");
      res->keep_alive(false);
      res->body() = nlohmann::json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}}.dump();
      res->prepare_payload();
      write(res);
      return;
    }
    stream_.expires_never();
    std::make_shared<WsSession>(stream_.release_socket(), hub_, std::move(actor))->accept(std::move(req));
  }

  void write(std::shared_ptr<http::response<http::string_body>> res) {
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read_next();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  Api& api_;
  Hub& hub_;
};

}  // namespace

struct Server::Impl {
  Api& api;
  Hub& hub;
  std::string address;
  std::uint16_t requested_port;
  unsigned thread_count;
  net::io_context ioc;
  tcp::acceptor acceptor{net::make_strand(ioc)};
  std::vector<std::thread> threads;
  std::uint16_t bound_port = 0;
  std::mutex mu;
  std::condition_variable cv;
  bool running = false;

  Impl(Api& a, Hub& h, std::string addr, std::uint16_t port, unsigned n)
      : api(a), hub(h), address(std::move(addr)), requested_port(port), thread_count(std::max(1u, n)), ioc(static_cast<int>(thread_count)) {}

  void accept_next() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec == net::error::operation_aborted) return;
      } else {
        beast::error_code ignored;
        socket.set_option(tcp::no_delay(true), ignored);
        std::make_shared<HttpSession>(std::move(socket), api, hub)->run();
      }
      accept_next();
    });
  }
};

Server::Server(Api& api, Hub& hub, std::string address, std::uint16_t port, unsigned threads)
    : impl_(std::make_unique<Impl>(api, hub, std::move(address), port, threads)) {}

Server::~Server() { stop(); }

void Server::start() {
  auto& s = *impl_;
  beast::error_code ec;
  const tcp::endpoint endpoint{net::ip::make_address(s.address, ec), s.requested_port};
  if (ec) throw Error(Errc::invalid_argument, "bad listen address '" + s.address + "'");
  s.acceptor.open(endpoint.protocol(), ec);
  if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor.bind(endpoint, ec);
  if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(Errc::io_error, "cannot listen on " + s.address + ":" + std::to_string(s.requested_port) + ": " + ec.message());
  s.bound_port = s.acceptor.local_endpoint().port();
  s.accept_next();
  {
    std::lock_guard lock(s.mu);
    s.running = true;
  }
  for (unsigned i = 0; i < s.thread_count; ++i) s.threads.emplace_back([&s] { s.ioc.run(); });
}

void Server::stop() {
  auto& s = *impl_;
  {
    std::lock_guard lock(s.mu);
    if (!s.running) return;
    s.running = false;
  }
  // Drop the hub's references first so no publisher touches a dying socket.
  s.hub.detach_all();
  net::post(s.acceptor.get_executor(), [&s] {
    beast::error_code ec;
    s.acceptor.close(ec);
  });
  s.ioc.stop();
  for (auto& t : s.threads) t.join();
  s.threads.clear();
  s.cv.notify_all();
}

void Server::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait(lock, [&] { return !impl_->running; });
}

std::uint16_t Server::port() const noexcept { return impl_->bound_port; }

}  // namespace fieldlink::gateway

#pragma once

#include <deque>
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "ctrkit/service/service.hpp"
#include "ctrkit/service/tcp_server.hpp"

// HTTP/1.1 + WebSocket front end for Service on a single port.
//   GET /robots/{id}/stream   upgrades to a WebSocket of state events
//   everything else           Service::handle
namespace ctrkit::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;

inline constexpr unsigned short kDefaultPort = 8642;
inline constexpr std::uint16_t kCloseUnknownSession = 4404;

// One subscribed WebSocket. Lives on the server io_context; events from
// command threads are posted there and written in arrival order.
class StreamSession : public std::enable_shared_from_this<StreamSession> {
 public:
  StreamSession(asio::io_context& ioc, websocket::stream<tcp::socket> ws, std::shared_ptr<Session> session)
      : ioc_(ioc), ws_(std::move(ws)), session_(std::move(session)) {}

  void start(std::function<void(const std::shared_ptr<StreamSession>&)> on_close) {
    if (closed_) return;
    on_close_ = std::move(on_close);
    std::weak_ptr<StreamSession> weak = shared_from_this();
    auto& ioc = ioc_;
    listener_ = session_->subscribe([weak, &ioc](const std::string& event) {
      asio::post(ioc, [weak, event] {
        if (auto self = weak.lock()) self->enqueue(event);
      });
    });
    do_read();
  }

  // Called on the io_context thread.
  void close() {
    if (closed_) return;
    closed_ = true;
    session_->unsubscribe(listener_);
    boost::system::error_code ignored;
    beast::get_lowest_layer(ws_).shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).close(ignored);
    if (on_close_) on_close_(shared_from_this());
  }

 private:
  void enqueue(const std::string& event) {
    if (closed_) return;
    queue_.push_back(event);
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->do_write();
    });
  }

  // Client messages are ignored; reading keeps control frames flowing and
  // notices disconnects.
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->buffer_.consume(self->buffer_.size());
      self->do_read();
    });
  }

  asio::io_context& ioc_;
  websocket::stream<tcp::socket> ws_;
  std::shared_ptr<Session> session_;
  std::uint64_t listener_ = 0;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closed_ = false;
  std::function<void(const std::shared_ptr<StreamSession>&)> on_close_;
};

class HttpServer {
 public:
  HttpServer(Service& service, const std::string& host, unsigned short port)
      : service_(service), tcp_(host, port, [this](tcp::socket& s) { serve(s); }) {}

  ~HttpServer() { stop(); }

  unsigned short port() const { return tcp_.port(); }
  void start() { tcp_.start(); }

  void stop() {
    tcp_.stop([this] {
      std::set<std::shared_ptr<StreamSession>> open;
      {
        std::lock_guard lock(streams_mutex_);
        open.swap(streams_);
      }
      for (const auto& s : open) s->close();
    });
    // Streams that were still being set up when the io_context stopped.
    std::set<std::shared_ptr<StreamSession>> late;
    {
      std::lock_guard lock(streams_mutex_);
      late.swap(streams_);
    }
    for (const auto& s : late) s->close();
  }

 private:
  static void add_common_headers(http::response<http::string_body>& res) {
    res.set(http::field::server, "ctrkit");
    res.set(http::field::access_control_allow_origin, "*");
  }

  static std::optional<std::string> stream_session_id(std::string_view target) {
    const auto q = target.find('?');
    const auto path = target.substr(0, q);
    const std::string_view prefix = "/robots/";
    const std::string_view suffix = "/stream";
    if (path.size() <= prefix.size() + suffix.size() || path.substr(0, prefix.size()) != prefix ||
        path.substr(path.size() - suffix.size()) != suffix) {
      return std::nullopt;
    }
    const auto id = path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
    if (id.find('/') != std::string_view::npos) return std::nullopt;
    return std::string(id);
  }

  void serve(tcp::socket& socket) {
    beast::flat_buffer buffer;
    for (;;) {
      http::request<http::string_body> req;
      beast::error_code ec;
      http::read(socket, buffer, req, ec);
      if (ec) return;

      if (websocket::is_upgrade(req)) {
        upgrade(socket, std::move(req));
        return;
      }

      http::response<http::string_body> res;
      res.version(req.version());
      add_common_headers(res);
      if (req.method() == http::verb::options) {
        res.result(http::status::no_content);
        res.set(http::field::access_control_allow_methods, "GET, POST, PUT, PATCH, DELETE, OPTIONS");
        res.set(http::field::access_control_allow_headers, "Content-Type");
      } else {
        const auto r = service_.handle(std::string(req.method_string()), std::string(req.target()), req.body());
        res.result(static_cast<http::status>(r.status));
        res.set(http::field::content_type, "application/json");
        res.body() = r.body.dump();
      }
      res.keep_alive(req.keep_alive());
      res.prepare_payload();
      http::write(socket, res, ec);
      if (ec || !res.keep_alive()) return;
    }
  }

  void upgrade(tcp::socket& socket, http::request<http::string_body> req) {
    websocket::stream<tcp::socket> ws(std::move(socket));
    ws.set_option(websocket::stream_base::decorator(
        [](websocket::response_type& res) { res.set(http::field::server, "ctrkit"); }));
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;

    const auto id = stream_session_id(std::string_view(req.target().data(), req.target().size()));
    auto session = id ? service_.find(*id) : nullptr;
    if (!session) {
      ws.close(websocket::close_reason(static_cast<websocket::close_code>(kCloseUnknownSession), "unknown session"), ec);
      return;
    }
    auto stream = std::make_shared<StreamSession>(tcp_.context(), std::move(ws), std::move(session));
    {
      std::lock_guard lock(streams_mutex_);
      streams_.insert(stream);
    }
    asio::post(tcp_.context(), [this, stream] {
      stream->start([this](const std::shared_ptr<StreamSession>& s) {
        std::lock_guard lock(streams_mutex_);
        streams_.erase(s);
      });
    });
  }

  Service& service_;
  TcpServer tcp_;
  std::mutex streams_mutex_;
  std::set<std::shared_ptr<StreamSession>> streams_;
};

}  // namespace ctrkit::service

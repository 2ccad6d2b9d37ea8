#pragma once

#include <sys/socket.h>

#include <atomic>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <boost/asio.hpp>

namespace ctrkit::service {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

// Accepts on one io_context thread and serves each connection with blocking
// I/O on its own thread. The io_context stays available to connection code
// for asynchronous work that outlives the connection thread.
class TcpServer {
 public:
  using Handler = std::function<void(tcp::socket&)>;

  TcpServer(const std::string& host, unsigned short port, Handler handler)
      : acceptor_(ioc_), handler_(std::move(handler)) {
    const tcp::endpoint ep(asio::ip::make_address(host), port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  }

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;
  ~TcpServer() { stop(); }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }
  asio::io_context& context() { return ioc_; }

  void start() {
    do_accept();
    runner_ = std::thread([this] { ioc_.run(); });
  }

  // Closes the listener, aborts open connections and joins every thread.
  // `before_stop` runs on the io_context thread before it stops.
  void stop(std::function<void()> before_stop = {}) {
    if (stopped_.exchange(true)) return;
    asio::post(ioc_, [this, before_stop] {
      boost::system::error_code ignored;
      acceptor_.close(ignored);
      if (before_stop) before_stop();
    });
    {
      std::lock_guard lock(mutex_);
      for (auto& c : connections_) {
        if (c->fd >= 0) ::shutdown(c->fd, SHUT_RDWR);  // unblocks the connection thread
      }
    }
    for (;;) {
      std::unique_ptr<Connection> c;
      {
        std::lock_guard lock(mutex_);
        if (connections_.empty()) break;
        c = std::move(connections_.front());
        connections_.pop_front();
      }
      if (c->thread.joinable()) c->thread.join();
    }
    asio::post(ioc_, [this] { ioc_.stop(); });
    if (runner_.joinable()) runner_.join();
  }

 private:
  struct Connection {
    explicit Connection(tcp::socket s) : socket(std::move(s)), fd(socket.native_handle()) {}
    tcp::socket socket;
    std::thread thread;
    std::atomic<bool> done{false};
    int fd;  // guarded by mutex_; -1 once the handler has let go of the socket
  };

  void reap() {
    std::lock_guard lock(mutex_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      if ((*it)->done) {
        (*it)->thread.join();
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void do_accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) return;  // listener closed
      reap();
      auto conn = std::make_unique<Connection>(std::move(socket));
      Connection* raw = conn.get();
      {
        std::lock_guard lock(mutex_);
        if (stopped_) return;
        connections_.push_back(std::move(conn));
        raw->thread = std::thread([this, raw] {
          try {
            handler_(raw->socket);
          } catch (const std::exception&) {
          }
          {
            std::lock_guard guard(mutex_);
            raw->fd = -1;
          }
          boost::system::error_code ignored;
          if (raw->socket.is_open()) raw->socket.close(ignored);
          raw->done = true;
        });
      }
      do_accept();
    });
  }

  asio::io_context ioc_;
  tcp::acceptor acceptor_;
  Handler handler_;
  std::thread runner_;
  std::mutex mutex_;
  std::list<std::unique_ptr<Connection>> connections_;
  std::atomic<bool> stopped_{false};
};

}  // namespace ctrkit::service

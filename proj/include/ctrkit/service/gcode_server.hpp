#pragma once

#include <functional>
#include <mutex>
#include <string>

#include "ctrkit/actuation.hpp"
#include "ctrkit/service/tcp_server.hpp"

// Line-oriented G-code socket: one command per line, the controller reply
// ("ok", "error: ...", or a position report followed by "ok") is sent back.
namespace ctrkit::service {

inline constexpr unsigned short kDefaultGcodePort = 8643;

class GcodeServer {
 public:
  using LineHandler = std::function<std::string(const std::string& line)>;

  GcodeServer(const std::string& host, unsigned short port, LineHandler handler)
      : handler_(std::move(handler)), tcp_(host, port, [this](tcp::socket& s) { serve(s); }) {}

  // Serves a single shared controller; lines from all clients are applied
  // one at a time.
  GcodeServer(const std::string& host, unsigned short port, VirtualController& controller)
      : GcodeServer(host, port, [this, &controller](const std::string& line) {
          std::lock_guard lock(controller_mutex_);
          return controller.execute(line).text;
        }) {}

  ~GcodeServer() { stop(); }

  unsigned short port() const { return tcp_.port(); }
  void start() { tcp_.start(); }
  void stop() { tcp_.stop(); }

 private:
  void serve(tcp::socket& socket) {
    asio::streambuf buffer;
    for (;;) {
      boost::system::error_code ec;
      asio::read_until(socket, buffer, '\n', ec);
      if (ec && buffer.size() == 0) return;
      std::istream in(&buffer);
      std::string line;
      std::getline(in, line);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::string reply = handler_(line);
      asio::write(socket, asio::buffer(reply), ec);
      if (ec) return;
    }
  }

  LineHandler handler_;
  std::mutex controller_mutex_;
  TcpServer tcp_;
};

}  // namespace ctrkit::service

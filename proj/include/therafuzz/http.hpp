#pragma once

#include <httplib.h>

#include <string>

#include "therafuzz/service.hpp"

namespace therafuzz {

/// Serves a TherapyService over HTTP/1.1 with JSON bodies.
class HttpServer {
 public:
  explicit HttpServer(TherapyService& service) : service_(service) {
    // The library default adds SO_REUSEPORT, which would let a second server
    // silently share an occupied port.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      Request r{req.method, req.path, {}, req.body};
      for (const auto& [k, v] : req.params) r.query.emplace(k, v);
      auto out = service_.handle(r);
      res.status = out.status;
      res.set_content(out.body.dump(), "application/json");
    };
    server_.Get(".*", route);
    server_.Post(".*", route);
    server_.Put(".*", route);
    server_.Patch(".*", route);
    server_.Delete(".*", route);
    // Browser clients on another origin preflight every JSON request.
    server_.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
  }

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving. Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }

  /// Serves until stop(). Requires a successful bind().
  bool serve() { return server_.listen_after_bind(); }

  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  TherapyService& service_;
  httplib::Server server_;
};

}  // namespace therafuzz

#pragma once

#include <memory>
#include <string>

#include "fishing/service.hpp"

namespace fishing::service {

/// HTTP/1.1 front end mapping the REST routes onto a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds to an ephemeral port and returns it.
  int bind_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fishing::service

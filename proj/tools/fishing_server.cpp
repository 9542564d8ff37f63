#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "fishing/datastore.hpp"
#include "fishing/http_server.hpp"
#include "fishing/service.hpp"

namespace {
fishing::service::HttpServer* g_server = nullptr;
}

int main(int argc, char** argv) {
  using namespace fishing;

  CLI::App app{"Investigation service over a fishing data directory"};
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "Service config (JSON); FISHING_* environment variables override it");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = service::load_config(config_path, service::process_env());
    store::Store store(config.data_dir);
    service::Service svc(store, config);
    service::HttpServer server(svc);
    if (!server.bind(config.listen_host, config.listen_port)) {
      std::cerr << "error: cannot bind " << config.listen_host << ':' << config.listen_port << '\n';
      return 2;
    }
    g_server = &server;
    std::signal(SIGINT, [](int) { g_server->stop(); });
    std::signal(SIGTERM, [](int) { g_server->stop(); });
    std::cerr << "listening on " << config.listen_host << ':' << config.listen_port << " (data "
              << config.data_dir << (config.test_mode ? ", test mode" : "") << ")\n";
    server.listen_after_bind();
    g_server = nullptr;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::internal ? 2 : 1;
  }
  return 0;
}

#include "fishing/http_server.hpp"

#include <httplib.h>

namespace fishing::service {

struct HttpServer::Impl {
  explicit Impl(Service& svc) : service(svc) {}
  Service& service;
  httplib::Server server;
};

namespace {

Query query_of(const httplib::Request& req) {
  Query query;
  for (const auto& [key, value] : req.params) query[key] = value;
  return query;
}

void reply(httplib::Response& res, const Response& response) {
  res.status = response.status;
  res.set_content(response.body, response.content_type);
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& server = impl_->server;
  auto& svc = impl_->service;

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_pre_routing_handler([&svc](const httplib::Request& req, httplib::Response& res) {
    if (req.method == "OPTIONS") return httplib::Server::HandlerResponse::Unhandled;
    std::optional<std::string> header;
    if (req.has_header("Authorization")) header = req.get_header_value("Authorization");
    if (auto denied = svc.authorize(header)) {
      reply(res, *denied);
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  server.Post("/scenarios", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.create_scenario(req.body));
  });
  server.Post(R"(/scenarios/([^/]+)/simulate)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.simulate(req.matches[1]));
  });
  server.Get(R"(/scenarios/([^/]+)/truth)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.scenario_truth(req.matches[1]));
  });
  server.Get("/logs", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.list_logs()); });
  server.Get(R"(/logs/([^/]+)/aps)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.log_aps(req.matches[1]));
  });
  server.Get(R"(/logs/([^/]+)/sightings)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.log_sightings(req.matches[1], query_of(req)));
  });
  server.Get(R"(/logs/([^/]+)/events)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.log_events(req.matches[1], query_of(req)));
  });
  server.Post("/investigations", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.create_investigation(req.body));
  });
  server.Get(R"(/investigations/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.get_investigation(req.matches[1]));
  });
  server.Put(R"(/investigations/([^/]+)/intervals)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.put_intervals(req.matches[1], req.body));
  });
  server.Post(R"(/investigations/([^/]+)/run)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.run_investigation(req.matches[1], req.body));
  });
  server.Get(R"(/investigations/([^/]+)/result)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.investigation_result(req.matches[1]));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace fishing::service

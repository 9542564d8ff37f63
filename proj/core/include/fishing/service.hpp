#pragma once

// Investigation workflow over the datastore, independent of the transport.
// Each handler returns a status and a JSON body; errors become ApiError
// bodies {"error": {"code", "message", "detail"}}.

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "fishing/datastore.hpp"
#include "fishing/error.hpp"

namespace fishing::service {

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string data_dir = "fishing-data";
  /// Enables GET /scenarios/{id}/truth.
  bool test_mode = false;
  /// When non-empty, requests must carry "Authorization: Bearer <token>".
  std::string token;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the optional JSON config file, then applies FISHING_LISTEN
/// ("host:port"), FISHING_DATA_DIR, FISHING_TEST_MODE and FISHING_TOKEN.
ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env);
EnvLookup process_env();

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

int http_status(ErrorCode code);
Response error_response(const Error& error);

using Query = std::map<std::string, std::string>;

class Service {
 public:
  Service(store::Store& store, ServiceConfig config) : store_(store), config_(std::move(config)) {}

  const ServiceConfig& config() const { return config_; }

  Response create_scenario(const std::string& body);
  Response simulate(const std::string& scenario_id);
  Response scenario_truth(const std::string& scenario_id);

  Response list_logs();
  Response log_aps(const std::string& log_id);
  Response log_sightings(const std::string& log_id, const Query& query);
  Response log_events(const std::string& log_id, const Query& query);

  Response create_investigation(const std::string& body);
  Response get_investigation(const std::string& id);
  Response put_intervals(const std::string& id, const std::string& body);
  Response run_investigation(const std::string& id, const std::string& body);
  Response investigation_result(const std::string& id);

  /// Checks the bearer token; nullopt when the request may proceed.
  std::optional<Response> authorize(const std::optional<std::string>& authorization_header) const;

 private:
  store::Store& store_;
  ServiceConfig config_;
};

}  // namespace fishing::service

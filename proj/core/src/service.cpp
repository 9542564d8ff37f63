#include "fishing/service.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>
#include <set>

#include "fishing/codec.hpp"
#include "fishing/filter.hpp"
#include "fishing/simulator.hpp"

namespace fishing::service {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::internal: return 500;
  }
  return 500;
}

Response error_response(const Error& error) {
  json detail = json::object();
  for (const auto& [key, value] : error.detail()) detail[key] = value;
  json body{{"error", {{"code", to_string(error.code())}, {"message", error.what()}, {"detail", detail}}}};
  return {http_status(error.code()), body.dump() + "\n"};
}

namespace {

Response ok(const json& body, int status = 200) { return {status, body.dump(2) + "\n"}; }

template <class F>
Response handle(F&& handler) {
  try {
    return handler();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(Error(ErrorCode::internal, e.what()));
  }
}

json parse_body(const std::string& body, std::string_view what) {
  if (body.empty()) return json::object();
  auto j = codec::parse_json(body, what);
  if (!j.is_object()) fail_validation(std::string(what) + " must be a JSON object");
  return j;
}

Seconds query_time(const Query& query, const std::string& key, Seconds fallback) {
  auto it = query.find(key);
  if (it == query.end() || it->second.empty()) return fallback;
  return codec::parse_double(it->second);
}

std::optional<std::string> query_text(const Query& query, const std::string& key) {
  auto it = query.find(key);
  if (it == query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

constexpr Seconds kMinTime = std::numeric_limits<double>::lowest();
constexpr Seconds kMaxTime = std::numeric_limits<double>::max();

std::uint64_t required_version(const json& body) {
  if (!body.contains("version") || !body.at("version").is_number_unsigned()) {
    fail_validation("request needs the investigation 'version' it was based on");
  }
  return body.at("version").get<std::uint64_t>();
}

void check_unique_aps(const std::vector<StayingInterval>& intervals) {
  std::set<std::string> seen;
  for (const auto& interval : intervals) {
    if (!seen.insert(interval.ap_id).second) {
      fail_validation("AP '" + interval.ap_id + "' has more than one staying interval", {{"ap_id", interval.ap_id}});
    }
  }
}

bool truthy(std::string value) {
  for (auto& c : value) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return value == "1" || value == "true" || value == "yes" || value == "on";
}

}  // namespace

ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env) {
  ServiceConfig config;
  if (path) {
    const auto j = codec::parse_json(codec::read_file(*path), "service config");
    try {
      config.listen_host = j.value("listen_host", config.listen_host);
      config.listen_port = j.value("listen_port", config.listen_port);
      config.data_dir = j.value("data_dir", config.data_dir);
      config.test_mode = j.value("test_mode", config.test_mode);
      config.token = j.value("token", config.token);
    } catch (const json::exception& e) {
      fail_validation(std::string("invalid service config: ") + e.what());
    }
  }
  if (auto listen = env("FISHING_LISTEN")) {
    const auto colon = listen->rfind(':');
    if (colon == std::string::npos) fail_validation("FISHING_LISTEN must be host:port");
    config.listen_host = listen->substr(0, colon);
    try {
      config.listen_port = std::stoi(listen->substr(colon + 1));
    } catch (const std::exception&) {
      fail_validation("FISHING_LISTEN has a malformed port");
    }
  }
  if (auto dir = env("FISHING_DATA_DIR")) config.data_dir = *dir;
  if (auto test = env("FISHING_TEST_MODE")) config.test_mode = truthy(*test);
  if (auto token = env("FISHING_TOKEN")) config.token = *token;
  return config;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* value = std::getenv(name.c_str())) return std::string(value);
    return std::nullopt;
  };
}

std::optional<Response> Service::authorize(const std::optional<std::string>& authorization_header) const {
  if (config_.token.empty()) return std::nullopt;
  if (authorization_header && *authorization_header == "Bearer " + config_.token) return std::nullopt;
  json body{{"error", {{"code", "unauthorized"}, {"message", "missing or wrong bearer token"}, {"detail", json::object()}}}};
  return Response{401, body.dump() + "\n"};
}

Response Service::create_scenario(const std::string& body) {
  return handle([&] {
    const auto scenario = codec::scenario_from_json(codec::parse_json(body, "scenario"));
    return ok({{"id", store_.put_scenario(scenario)}}, 201);
  });
}

Response Service::simulate(const std::string& scenario_id) {
  return handle([&] {
    const auto scenario = store_.get_scenario(scenario_id);
    const auto output = sim::run_scenario(scenario);
    std::vector<std::string> aps;
    for (const auto& ap : scenario.aps) aps.push_back(ap.ap_id);
    const auto log_id = store_.create_log(scenario_id, aps);
    const auto events = store_.append_events(log_id, output.probes);
    const auto sightings = store_.append_sightings(log_id, output.sightings);
    store_.put_truth(scenario_id, output.truth);
    return ok({{"log_id", log_id}, {"events", events}, {"sightings", sightings}}, 201);
  });
}

Response Service::scenario_truth(const std::string& scenario_id) {
  return handle([&] {
    if (!config_.test_mode) fail_not_found("ground truth is only served in test mode");
    return ok(codec::to_json(store_.get_truth(scenario_id)));
  });
}

Response Service::list_logs() {
  return handle([&] { return ok({{"logs", store_.list_logs()}}); });
}

Response Service::log_aps(const std::string& log_id) {
  return handle([&] { return ok({{"log_id", log_id}, {"aps", store_.log_aps(log_id)}}); });
}

Response Service::log_sightings(const std::string& log_id, const Query& query) {
  return handle([&] {
    const auto from = query_time(query, "from", kMinTime);
    const auto to = query_time(query, "to", kMaxTime);
    json sightings = json::array();
    for (const auto& s : store_.query_sightings(log_id, query_text(query, "ap"), from, to)) {
      sightings.push_back(
          {{"timestamp", s.timestamp}, {"ap_id", s.ap_id}, {"persona_id", s.persona_id}, {"image_ref", s.image_ref}});
    }
    return ok({{"log_id", log_id}, {"sightings", sightings}});
  });
}

Response Service::log_events(const std::string& log_id, const Query& query) {
  return handle([&] {
    const auto from = query_time(query, "from", kMinTime);
    const auto to = query_time(query, "to", kMaxTime);
    std::vector<ProbeEvent> events;
    if (auto ap = query_text(query, "ap")) {
      events = store_.query_events(log_id, *ap, from, to);
    } else {
      if (!(from < to)) fail_validation("query range needs from < to");
      for (auto& e : store_.all_events(log_id)) {
        if (membership(e.timestamp, from, to)) events.push_back(std::move(e));
      }
    }
    json out = json::array();
    for (const auto& e : events) {
      out.push_back({{"timestamp", e.timestamp},
                     {"ap_id", e.ap_id},
                     {"mac", e.mac.to_string()},
                     {"rssi", e.rssi},
                     {"ssid", e.ssid ? json(*e.ssid) : json(nullptr)}});
    }
    return ok({{"log_id", log_id}, {"events", out}});
  });
}

Response Service::create_investigation(const std::string& body) {
  return handle([&] {
    const auto request = parse_body(body, "investigation request");
    if (!request.contains("log_id") || !request.at("log_id").is_string()) fail_validation("log_id is required");
    Investigation draft;
    draft.log_id = request.at("log_id").get<std::string>();
    draft.scenario_ref = store_.log_meta(draft.log_id).scenario_ref;
    if (request.contains("staying_intervals")) {
      draft.staying_intervals = codec::staying_intervals_from_json(request.at("staying_intervals"));
      check_unique_aps(draft.staying_intervals);
    }
    if (request.contains("config")) draft.config = codec::filter_config_from_json(request.at("config"));
    return ok(codec::to_json(store_.create_investigation(std::move(draft))), 201);
  });
}

Response Service::get_investigation(const std::string& id) {
  return handle([&] { return ok(codec::to_json(store_.load_investigation(id))); });
}

Response Service::put_intervals(const std::string& id, const std::string& body) {
  return handle([&] {
    const auto request = parse_body(body, "interval update");
    const auto version = required_version(request);
    auto next = store_.load_investigation(id);
    if (!request.contains("staying_intervals")) fail_validation("staying_intervals is required");
    next.staying_intervals = codec::staying_intervals_from_json(request.at("staying_intervals"));
    check_unique_aps(next.staying_intervals);
    if (request.contains("config")) next.config = codec::filter_config_from_json(request.at("config"));
    // Changed inputs invalidate the previous result until the next run.
    next.status = InvestigationStatus::draft;
    next.result.reset();
    return ok(codec::to_json(store_.update_investigation(std::move(next), version)));
  });
}

Response Service::run_investigation(const std::string& id, const std::string& body) {
  return handle([&] {
    const auto request = parse_body(body, "run request");
    auto next = store_.load_investigation(id);
    const auto version = request.contains("version") ? required_version(request) : next.version;
    if (next.staying_intervals.empty()) fail_validation("mark at least one staying interval before running");
    const auto events = store_.all_events(next.log_id);
    auto table = filter::run_filter(events, next.staying_intervals, next.config);
    next.result = table;
    next.status = InvestigationStatus::complete;
    store_.update_investigation(std::move(next), version);
    return Response{200, codec::render_table_machine(table)};
  });
}

Response Service::investigation_result(const std::string& id) {
  return handle([&] {
    const auto investigation = store_.load_investigation(id);
    if (investigation.status != InvestigationStatus::complete) {
      throw Error(ErrorCode::conflict, "investigation '" + id + "' has not been run", {{"status", "draft"}});
    }
    return Response{200, codec::render_table_machine(*investigation.result)};
  });
}

}  // namespace fishing::service

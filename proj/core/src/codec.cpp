#include "fishing/codec.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fishing/error.hpp"

namespace fishing::codec {

using nlohmann::json;

namespace {

// Runs a decoder, turning nlohmann type/key errors into Error(validation).
template <class F>
auto guarded(std::string_view what, F&& decode) -> decltype(decode()) {
  try {
    return decode();
  } catch (const json::exception& e) {
    fail_validation("invalid " + std::string(what) + ": " + e.what());
  }
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known, std::string_view what) {
  if (!j.is_object()) fail_validation(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail_validation("unknown field '" + key + "' in " + std::string(what), {{"field", key}});
    }
  }
}

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (++i == text.size()) fail_validation("dangling escape in log field");
    switch (text[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: fail_validation("unknown escape in log field");
    }
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

template <class T, class Parse>
std::vector<T> read_lines(std::istream& in, Parse parse) {
  std::vector<T> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(parse(line));
    } catch (const Error& e) {
      fail_validation("line " + std::to_string(number) + ": " + e.what(), {{"line", std::to_string(number)}});
    }
  }
  return out;
}

json optional_number(const std::optional<double>& value) { return value ? json(*value) : json(nullptr); }

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) fail_validation("cannot format a non-finite number");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error(ErrorCode::internal, "to_chars failed");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) {
    fail_validation("malformed number '" + std::string(text) + "'");
  }
  return value;
}

std::string format_probe_line(const ProbeEvent& event) {
  std::string line = format_double(event.timestamp);
  line += '\t';
  line += escape_field(event.ap_id);
  line += '\t';
  line += event.mac.to_string();
  line += '\t';
  line += format_double(event.rssi);
  line += '\t';
  if (event.ssid) {
    line += '=';
    line += escape_field(*event.ssid);
  }
  line += '\n';
  return line;
}

ProbeEvent parse_probe_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  const auto fields = split_tabs(line);
  if (fields.size() != 5) fail_validation("probe line needs 5 tab-separated fields");
  ProbeEvent event;
  event.timestamp = parse_double(fields[0]);
  event.ap_id = unescape_field(fields[1]);
  event.mac = MacAddress::parse(fields[2]);
  event.rssi = parse_double(fields[3]);
  if (!fields[4].empty()) {
    if (fields[4].front() != '=') fail_validation("SSID field must start with '='");
    event.ssid = unescape_field(fields[4].substr(1));
  }
  validate(event);
  return event;
}

std::string format_sighting_line(const SightingEvent& event) {
  std::string line = format_double(event.timestamp);
  line += '\t';
  line += escape_field(event.ap_id);
  line += '\t';
  line += escape_field(event.persona_id);
  line += '\t';
  line += escape_field(event.image_ref);
  line += '\n';
  return line;
}

SightingEvent parse_sighting_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  const auto fields = split_tabs(line);
  if (fields.size() != 4) fail_validation("sighting line needs 4 tab-separated fields");
  SightingEvent event{parse_double(fields[0]), unescape_field(fields[1]), unescape_field(fields[2]),
                      unescape_field(fields[3])};
  validate(event);
  return event;
}

void write_probe_log(std::ostream& out, std::span<const ProbeEvent> events) {
  for (const auto& event : events) out << format_probe_line(event);
}

std::vector<ProbeEvent> read_probe_log(std::istream& in) {
  return read_lines<ProbeEvent>(in, [](const std::string& line) { return parse_probe_line(line); });
}

void write_sighting_log(std::ostream& out, std::span<const SightingEvent> events) {
  for (const auto& event : events) out << format_sighting_line(event);
}

std::vector<SightingEvent> read_sighting_log(std::istream& in) {
  return read_lines<SightingEvent>(in, [](const std::string& line) { return parse_sighting_line(line); });
}

json to_json(const filter::FilterConfig& cfg) {
  return {{"slot_len", cfg.slot_len},
          {"slots_per_side", cfg.slots_per_side},
          {"rssi_threshold", cfg.rssi_threshold},
          {"rate_threshold", optional_number(cfg.rate_threshold)},
          {"sides", filter::to_string(cfg.sides)}};
}

filter::FilterConfig filter_config_from_json(const json& j) {
  return guarded("filter config", [&] {
    reject_unknown_keys(j, {"slot_len", "slots_per_side", "rssi_threshold", "rate_threshold", "sides"},
                        "filter config");
    filter::FilterConfig cfg;
    if (j.contains("slot_len")) cfg.slot_len = j.at("slot_len").get<double>();
    if (j.contains("slots_per_side")) cfg.slots_per_side = j.at("slots_per_side").get<int>();
    if (j.contains("rssi_threshold")) cfg.rssi_threshold = j.at("rssi_threshold").get<double>();
    if (j.contains("rate_threshold") && !j.at("rate_threshold").is_null()) {
      cfg.rate_threshold = j.at("rate_threshold").get<double>();
    }
    if (j.contains("sides")) cfg.sides = filter::parse_sides(j.at("sides").get<std::string>());
    filter::validate(cfg);
    return cfg;
  });
}

json to_json(const StayingInterval& interval) {
  return {{"ap_id", interval.ap_id}, {"enter", interval.enter}, {"exit", interval.exit}};
}

StayingInterval staying_interval_from_json(const json& j) {
  return guarded("staying interval", [&] {
    reject_unknown_keys(j, {"ap_id", "enter", "exit"}, "staying interval");
    StayingInterval interval{j.at("ap_id").get<std::string>(), j.at("enter").get<double>(),
                             j.at("exit").get<double>()};
    validate(interval);
    return interval;
  });
}

json to_json(std::span<const StayingInterval> intervals) {
  json out = json::array();
  for (const auto& interval : intervals) out.push_back(to_json(interval));
  return out;
}

std::vector<StayingInterval> staying_intervals_from_json(const json& j) {
  if (!j.is_array()) fail_validation("staying intervals must be a JSON array");
  std::vector<StayingInterval> out;
  for (const auto& item : j) out.push_back(staying_interval_from_json(item));
  return out;
}

json to_json(const filter::SuspiciousRateTable& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"mac", row.mac.to_string()}, {"rates", row.rates}, {"sum", row.sum}});
  }
  return {{"ap_ids", table.ap_ids}, {"rows", rows}, {"truncated_aps", table.truncated_aps}};
}

filter::SuspiciousRateTable table_from_json(const json& j) {
  return guarded("rate table", [&] {
    filter::SuspiciousRateTable table;
    table.ap_ids = j.at("ap_ids").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
      filter::TableRow parsed{MacAddress::parse(row.at("mac").get<std::string>()),
                              row.at("rates").get<std::vector<double>>(), row.at("sum").get<double>()};
      if (parsed.rates.size() != table.ap_ids.size()) fail_validation("rate row width does not match ap_ids");
      table.rows.push_back(std::move(parsed));
    }
    table.truncated_aps = j.at("truncated_aps").get<std::vector<std::string>>();
    return table;
  });
}

namespace {

json to_json(const sim::MacPolicy& policy) {
  if (std::holds_alternative<sim::StaticMac>(policy)) return "static";
  if (std::holds_alternative<sim::RandomizePerProbe>(policy)) return "randomize_per_probe";
  return {{"randomize_every", std::get<sim::RandomizeEvery>(policy).period}};
}

sim::MacPolicy mac_policy_from_json(const json& j) {
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    if (text == "static") return sim::StaticMac{};
    if (text == "randomize_per_probe") return sim::RandomizePerProbe{};
    fail_validation("unknown mac_policy '" + text + "'");
  }
  reject_unknown_keys(j, {"randomize_every"}, "mac_policy");
  return sim::RandomizeEvery{j.at("randomize_every").get<double>()};
}

}  // namespace

json to_json(const sim::Scenario& scenario) {
  json aps = json::array();
  for (const auto& ap : scenario.aps) {
    aps.push_back({{"id", ap.ap_id},
                   {"x", ap.position.x},
                   {"y", ap.position.y},
                   {"camera_radius", ap.camera_radius},
                   {"camera_working", ap.camera_working}});
  }
  json devices = json::array();
  for (const auto& device : scenario.devices) {
    json trajectory = json::array();
    for (const auto& w : device.trajectory) trajectory.push_back({w.t, w.position.x, w.position.y});
    json emission = nullptr;
    if (device.emission) {
      emission = {{"min_interval", device.emission->min_interval}, {"max_interval", device.emission->max_interval}};
    }
    devices.push_back({{"persona_id", device.persona_id},
                       {"mac", device.true_mac.to_string()},
                       {"role", sim::to_string(device.role)},
                       {"trajectory", trajectory},
                       {"emission", emission},
                       {"mac_policy", to_json(device.mac_policy)}});
  }
  return {{"schema_version", sim::kScenarioSchemaVersion},
          {"duration", scenario.duration},
          {"seed", scenario.seed},
          {"rf",
           {{"rssi_at_1m", scenario.rf.rssi_at_1m},
            {"path_loss_exponent", scenario.rf.path_loss_exponent},
            {"noise_sigma", scenario.rf.noise_sigma},
            {"sensitivity_floor", scenario.rf.sensitivity_floor}}},
          {"aps", aps},
          {"devices", devices}};
}

sim::Scenario scenario_from_json(const json& j) {
  return guarded("scenario", [&] {
    reject_unknown_keys(j, {"schema_version", "duration", "seed", "rf", "aps", "devices"}, "scenario");
    const int version = j.at("schema_version").get<int>();
    if (version != sim::kScenarioSchemaVersion) {
      fail_validation("unsupported scenario schema_version " + std::to_string(version));
    }
    sim::Scenario scenario;
    scenario.duration = j.at("duration").get<double>();
    scenario.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("rf")) {
      const auto& rf = j.at("rf");
      reject_unknown_keys(rf, {"rssi_at_1m", "path_loss_exponent", "noise_sigma", "sensitivity_floor"}, "rf");
      if (rf.contains("rssi_at_1m")) scenario.rf.rssi_at_1m = rf.at("rssi_at_1m").get<double>();
      if (rf.contains("path_loss_exponent")) scenario.rf.path_loss_exponent = rf.at("path_loss_exponent").get<double>();
      if (rf.contains("noise_sigma")) scenario.rf.noise_sigma = rf.at("noise_sigma").get<double>();
      if (rf.contains("sensitivity_floor")) scenario.rf.sensitivity_floor = rf.at("sensitivity_floor").get<double>();
    }
    for (const auto& ap : j.at("aps")) {
      reject_unknown_keys(ap, {"id", "x", "y", "camera_radius", "camera_working"}, "ap placement");
      sim::ApPlacement placement;
      placement.ap_id = ap.at("id").get<std::string>();
      placement.position = {ap.at("x").get<double>(), ap.at("y").get<double>()};
      placement.camera_radius = ap.value("camera_radius", 5.0);
      placement.camera_working = ap.value("camera_working", true);
      scenario.aps.push_back(std::move(placement));
    }
    for (const auto& d : j.at("devices")) {
      reject_unknown_keys(d, {"persona_id", "mac", "role", "trajectory", "emission", "mac_policy"}, "device");
      sim::DeviceProfile device;
      device.persona_id = d.at("persona_id").get<std::string>();
      device.true_mac = MacAddress::parse(d.at("mac").get<std::string>());
      device.role = sim::parse_role(d.at("role").get<std::string>());
      for (const auto& w : d.at("trajectory")) {
        if (!w.is_array() || w.size() != 3) fail_validation("waypoint must be [t, x, y]");
        device.trajectory.push_back({w[0].get<double>(), {w[1].get<double>(), w[2].get<double>()}});
      }
      if (d.contains("emission") && !d.at("emission").is_null()) {
        const auto& e = d.at("emission");
        reject_unknown_keys(e, {"min_interval", "max_interval"}, "emission");
        device.emission = sim::Emission{e.at("min_interval").get<double>(), e.at("max_interval").get<double>()};
      }
      if (d.contains("mac_policy")) device.mac_policy = mac_policy_from_json(d.at("mac_policy"));
      scenario.devices.push_back(std::move(device));
    }
    sim::validate(scenario);
    return scenario;
  });
}

json to_json(const sim::GroundTruth& truth) {
  json macs = json::array();
  for (const auto& epoch : truth.culprit_macs) {
    macs.push_back({{"valid_from", epoch.valid_from}, {"mac", epoch.mac.to_string()}});
  }
  return {{"culprit_persona", truth.culprit_persona},
          {"culprit_macs", macs},
          {"staying", to_json(std::span<const StayingInterval>(truth.staying))}};
}

sim::GroundTruth truth_from_json(const json& j) {
  return guarded("ground truth", [&] {
    sim::GroundTruth truth;
    truth.culprit_persona = j.at("culprit_persona").get<std::string>();
    for (const auto& epoch : j.at("culprit_macs")) {
      truth.culprit_macs.push_back(
          {epoch.at("valid_from").get<double>(), MacAddress::parse(epoch.at("mac").get<std::string>())});
    }
    truth.staying = staying_intervals_from_json(j.at("staying"));
    return truth;
  });
}

json to_json(const Investigation& investigation) {
  return {{"id", investigation.id},
          {"log_id", investigation.log_id},
          {"scenario_ref", investigation.scenario_ref},
          {"staying_intervals", to_json(std::span<const StayingInterval>(investigation.staying_intervals))},
          {"config", to_json(investigation.config)},
          {"result", investigation.result ? to_json(*investigation.result) : json(nullptr)},
          {"created_at", investigation.created_at},
          {"status", to_string(investigation.status)},
          {"version", investigation.version}};
}

Investigation investigation_from_json(const json& j) {
  return guarded("investigation", [&] {
    Investigation investigation;
    investigation.id = j.at("id").get<std::string>();
    investigation.log_id = j.at("log_id").get<std::string>();
    investigation.scenario_ref = j.value("scenario_ref", "");
    investigation.staying_intervals = staying_intervals_from_json(j.at("staying_intervals"));
    investigation.config = filter_config_from_json(j.at("config"));
    if (!j.at("result").is_null()) investigation.result = table_from_json(j.at("result"));
    investigation.created_at = j.at("created_at").get<std::int64_t>();
    investigation.status = parse_investigation_status(j.at("status").get<std::string>());
    investigation.version = j.at("version").get<std::uint64_t>();
    validate(investigation);
    return investigation;
  });
}

std::string render_table_machine(const filter::SuspiciousRateTable& table) { return to_json(table).dump(2) + "\n"; }

std::string render_table_text(const filter::SuspiciousRateTable& table) {
  std::ostringstream out;
  char cell[32];
  out << "mac              ";
  for (const auto& ap : table.ap_ids) {
    std::snprintf(cell, sizeof cell, " %10.10s", ap.c_str());
    out << cell;
  }
  out << "        sum\n";
  for (const auto& row : table.rows) {
    out << row.mac.to_string();
    for (double rate : row.rates) {
      std::snprintf(cell, sizeof cell, " %10.4f", rate);
      out << cell;
    }
    std::snprintf(cell, sizeof cell, " %10.4f", row.sum);
    out << cell << '\n';
  }
  if (table.rows.empty()) out << "(no candidate MAC addresses)\n";
  if (!table.truncated_aps.empty()) {
    out << "note: slot window exceeds the log's time range at";
    for (const auto& ap : table.truncated_aps) out << ' ' << ap;
    out << "; absence there was counted\n";
  }
  return out.str();
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail_validation("malformed " + std::string(what) + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_not_found("cannot read '" + path + "'", {{"path", path}});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::internal, "cannot write '" + path + "'", {{"path", path}});
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::internal, "short write to '" + path + "'", {{"path", path}});
}

}  // namespace fishing::codec

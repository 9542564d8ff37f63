#pragma once

// Wire and file formats: line-delimited event logs and JSON documents.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fishing/events.hpp"
#include "fishing/filter.hpp"
#include "fishing/investigation.hpp"
#include "fishing/simulator.hpp"

namespace fishing::codec {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

// Probe log line: timestamp \t ap_id \t mac \t rssi \t ssid '\n'.
// An absent SSID is an empty field; a present SSID is prefixed with '='
// so the empty SSID stays distinguishable. '\\', '\t' and '\n' are escaped.
std::string format_probe_line(const ProbeEvent& event);
ProbeEvent parse_probe_line(std::string_view line);

// Sighting log line: timestamp \t ap_id \t persona_id \t image_ref '\n'.
std::string format_sighting_line(const SightingEvent& event);
SightingEvent parse_sighting_line(std::string_view line);

void write_probe_log(std::ostream& out, std::span<const ProbeEvent> events);
std::vector<ProbeEvent> read_probe_log(std::istream& in);
void write_sighting_log(std::ostream& out, std::span<const SightingEvent> events);
std::vector<SightingEvent> read_sighting_log(std::istream& in);

nlohmann::json to_json(const filter::FilterConfig& cfg);
filter::FilterConfig filter_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StayingInterval& interval);
StayingInterval staying_interval_from_json(const nlohmann::json& j);
nlohmann::json to_json(std::span<const StayingInterval> intervals);
std::vector<StayingInterval> staying_intervals_from_json(const nlohmann::json& j);

nlohmann::json to_json(const filter::SuspiciousRateTable& table);
filter::SuspiciousRateTable table_from_json(const nlohmann::json& j);

nlohmann::json to_json(const sim::Scenario& scenario);
sim::Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json to_json(const sim::GroundTruth& truth);
sim::GroundTruth truth_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Investigation& investigation);
Investigation investigation_from_json(const nlohmann::json& j);

/// Canonical machine-readable table: pretty JSON with a trailing newline.
/// The service and the CLI both emit exactly these bytes.
std::string render_table_machine(const filter::SuspiciousRateTable& table);
/// Fixed-width text table for terminals.
std::string render_table_text(const filter::SuspiciousRateTable& table);

/// Parses JSON text, turning syntax errors into Error(validation).
nlohmann::json parse_json(std::string_view text, std::string_view what);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace fishing::codec

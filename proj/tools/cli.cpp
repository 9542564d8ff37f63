#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "fishing/codec.hpp"
#include "fishing/experiment.hpp"
#include "fishing/filter.hpp"
#include "fishing/simulator.hpp"

namespace fishing::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorCode code) { return code == ErrorCode::internal ? kInternal : kValidation; }

namespace {

template <class F>
int guarded(std::ostream& err, F&& command) {
  try {
    return command();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

filter::FilterConfig load_filter_config(const std::optional<std::string>& path) {
  if (!path) return {};
  return codec::filter_config_from_json(codec::parse_json(codec::read_file(*path), "filter config"));
}

sim::MacPolicy parse_policy(const std::string& text) {
  if (text == "static") return sim::StaticMac{};
  if (text == "randomize_per_probe") return sim::RandomizePerProbe{};
  fail_validation("unknown MAC policy '" + text + "'");
}

}  // namespace

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto scenario = codec::scenario_from_json(codec::parse_json(codec::read_file(options.scenario), "scenario"));
    if (options.seed) scenario.seed = *options.seed;
    const auto output = sim::run_scenario(scenario);

    const fs::path dir(options.out);
    fs::create_directories(dir);
    std::ostringstream events;
    codec::write_probe_log(events, output.probes);
    codec::write_file((dir / "events.tsv").string(), events.str());
    std::ostringstream sightings;
    codec::write_sighting_log(sightings, output.sightings);
    codec::write_file((dir / "sightings.tsv").string(), sightings.str());
    codec::write_file((dir / "truth.json").string(), codec::to_json(output.truth).dump(2) + "\n");
    codec::write_file((dir / "scenario.json").string(), codec::to_json(scenario).dump(2) + "\n");
    json aps = json::array();
    for (const auto& ap : scenario.aps) aps.push_back(ap.ap_id);
    json meta{{"log_id", dir.filename().string()}, {"scenario_ref", fs::path(options.scenario).stem().string()},
              {"aps", aps}};
    codec::write_file((dir / "log.json").string(), meta.dump(2) + "\n");

    out << "wrote " << output.probes.size() << " probe events and " << output.sightings.size()
        << " sightings to " << dir.string() << '\n';
    return kSuccess;
  });
}

int cmd_filter(const FilterOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.format != "table" && options.format != "machine") {
      fail_validation("--format must be 'table' or 'machine'");
    }
    const fs::path dir(options.log_dir);
    std::ifstream events_in(dir / "events.tsv");
    if (!events_in) fail_validation("no events.tsv in '" + dir.string() + "'");
    const auto events = codec::read_probe_log(events_in);

    // Either a bare array of intervals or {"staying_intervals": [...], "target_aps": [...]}.
    const auto doc = codec::parse_json(codec::read_file(options.intervals), "intervals file");
    std::vector<StayingInterval> intervals;
    if (doc.is_array()) {
      intervals = codec::staying_intervals_from_json(doc);
    } else if (doc.is_object() && doc.contains("staying_intervals")) {
      intervals = codec::staying_intervals_from_json(doc.at("staying_intervals"));
      if (doc.contains("target_aps")) {
        std::set<std::string> covered;
        for (const auto& interval : intervals) covered.insert(interval.ap_id);
        for (const auto& ap : doc.at("target_aps")) {
          if (!ap.is_string()) fail_validation("target_aps entries must be strings");
          if (!covered.contains(ap.get<std::string>())) {
            fail_validation("no staying interval for referenced AP '" + ap.get<std::string>() + "'");
          }
        }
      }
    } else {
      fail_validation("intervals file must hold an array or a 'staying_intervals' field");
    }

    const auto cfg = load_filter_config(options.config);
    const auto table = filter::run_filter(events, intervals, cfg);
    const auto machine = codec::render_table_machine(table);
    codec::write_file(options.out.value_or((dir / "result.json").string()), machine);
    out << (options.format == "machine" ? machine : codec::render_table_text(table));
    return kSuccess;
  });
}

int cmd_experiment(const ExperimentOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.format != "table" && options.format != "machine") {
      fail_validation("--format must be 'table' or 'machine'");
    }
    experiment::Knobs knobs;
    knobs.seed = options.seed;
    if (options.culprit_mac_policy != "static") knobs.culprit_mac_policy = parse_policy(options.culprit_mac_policy);
    const auto summary =
        experiment::run_experiment(options.trials, knobs, load_filter_config(options.config), options.threads);
    const auto machine = experiment::render_summary_machine(summary);
    if (options.out) codec::write_file(*options.out, machine);
    out << (options.format == "machine" ? machine : experiment::render_summary_text(summary));
    return kSuccess;
  });
}

int cmd_scenario(const ScenarioOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    experiment::Knobs knobs;
    knobs.seed = options.seed;
    if (options.culprit_mac_policy != "static") knobs.culprit_mac_policy = parse_policy(options.culprit_mac_policy);
    const auto scenario = experiment::make_experiment_scenario(options.trial, knobs);
    codec::write_file(options.out, codec::to_json(scenario).dump(2) + "\n");
    out << "wrote trial " << options.trial << " scenario (" << scenario.devices.size() << " devices) to "
        << options.out << '\n';
    return kSuccess;
  });
}

}  // namespace fishing::cli

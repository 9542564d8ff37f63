#pragma once

// File-backed append-only store for scenarios, event logs and investigations.
//
// Layout under the root directory:
//   LOCK                                  advisory lock, one writer process
//   scenarios/<id>/scenario.json
//   scenarios/<id>/truth.json             ground truth, if simulated
//   logs/<id>/log.json                    metadata (scenario_ref, AP list)
//   logs/<id>/events/<seq>.tsv            one segment per appended batch
//   logs/<id>/sightings/<seq>.tsv
//   investigations/<id>.json
//
// A batch becomes visible by renaming its finished segment into place, so
// after a crash a batch is either fully present or absent.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "fishing/events.hpp"
#include "fishing/investigation.hpp"
#include "fishing/simulator.hpp"

namespace fishing::store {

struct LogMeta {
  std::string log_id;
  std::string scenario_ref;
  std::vector<std::string> aps;
  bool operator==(const LogMeta&) const = default;
};

class Store {
 public:
  /// Creates the layout if missing. Throws Error(conflict) when another
  /// process holds the root.
  explicit Store(std::filesystem::path root);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& root() const { return root_; }

  std::string put_scenario(const sim::Scenario& scenario);
  sim::Scenario get_scenario(const std::string& scenario_id) const;
  void put_truth(const std::string& scenario_id, const sim::GroundTruth& truth);
  sim::GroundTruth get_truth(const std::string& scenario_id) const;

  std::string create_log(const std::string& scenario_ref, std::vector<std::string> aps);
  LogMeta log_meta(const std::string& log_id) const;
  std::vector<std::string> list_logs() const;
  /// AP ids declared at creation, plus any seen in appended events.
  std::vector<std::string> log_aps(const std::string& log_id) const;

  /// Events must be time-ordered within the batch. Returns accepted count.
  std::size_t append_events(const std::string& log_id, std::span<const ProbeEvent> events);
  std::size_t append_sightings(const std::string& log_id, std::span<const SightingEvent> events);

  /// Events of one AP with timestamp in [from, to), time-ordered.
  std::vector<ProbeEvent> query_events(const std::string& log_id, const std::string& ap_id, Seconds from,
                                       Seconds to) const;
  /// Whole log in append order.
  std::vector<ProbeEvent> all_events(const std::string& log_id) const;
  /// Sightings in [from, to), optionally restricted to one AP, time-ordered.
  std::vector<SightingEvent> query_sightings(const std::string& log_id, const std::optional<std::string>& ap_id,
                                             Seconds from, Seconds to) const;

  /// Writes events.tsv, sightings.tsv and log.json into `dir`.
  void export_log(const std::string& log_id, const std::filesystem::path& dir) const;
  /// Reads a directory in export layout into a new log.
  std::string import_log(const std::filesystem::path& dir);

  /// Assigns an id and version 1, stores and returns the new investigation.
  Investigation create_investigation(Investigation draft);
  void save_investigation(const Investigation& investigation);
  Investigation load_investigation(const std::string& id) const;
  /// Compare-and-swap on version: stores `next` with version expected+1.
  Investigation update_investigation(Investigation next, std::uint64_t expected_version);

 private:
  struct LogState;

  LogState& log_state(const std::string& log_id) const;
  std::string next_id(const std::string& prefix, const std::filesystem::path& dir);
  void load_segments(LogState& state) const;

  std::filesystem::path root_;
  int lock_fd_ = -1;
  mutable std::mutex registry_mu_;
  mutable std::map<std::string, std::unique_ptr<LogState>> logs_;
  std::mutex ids_mu_;
  std::mutex investigations_mu_;
};

}  // namespace fishing::store

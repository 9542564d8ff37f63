#include "fishing/datastore.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fishing/codec.hpp"
#include "fishing/error.hpp"

namespace fishing::store {

namespace fs = std::filesystem;

struct Store::LogState {
  fs::path dir;
  LogMeta meta;
  mutable std::shared_mutex mu;
  /// Serializes writers; readers only take `mu` shared.
  std::mutex writer_mu;
  std::size_t next_segment = 1;
  std::vector<ProbeEvent> events;
  /// Per-AP indices into `events`, ordered by (timestamp, append position).
  std::map<std::string, std::vector<std::size_t>> by_ap;
  std::vector<SightingEvent> sightings;
};

namespace {

void fsync_path(const fs::path& path, int flags) {
  const int fd = ::open(path.c_str(), flags);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

// Writes `contents` to `target` via a fsynced temporary and an atomic rename.
void durable_write(const fs::path& target, std::string_view contents) {
  const fs::path tmp = target.string() + ".tmp";
  codec::write_file(tmp.string(), contents);
  fsync_path(tmp, O_RDONLY);
  fs::rename(tmp, target);
  fsync_path(target.parent_path(), O_RDONLY | O_DIRECTORY);
}

std::string segment_name(std::size_t sequence) {
  char name[32];
  std::snprintf(name, sizeof name, "%08zu.tsv", sequence);
  return name;
}

std::vector<fs::path> sorted_segments(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& path = entry.path();
    if (path.extension() == ".tmp") {
      // Leftover of an interrupted batch; never became visible.
      fs::remove(path);
      continue;
    }
    if (path.extension() == ".tsv") out.push_back(path);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() < 128 && std::all_of(id.begin(), id.end(), [](char c) {
           return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
         });
}

void require_id(const std::string& id, const std::string& what) {
  if (!valid_id(id)) fail_not_found("unknown " + what + " '" + id + "'", {{"id", id}});
}

nlohmann::json meta_to_json(const LogMeta& meta) {
  return {{"log_id", meta.log_id}, {"scenario_ref", meta.scenario_ref}, {"aps", meta.aps}};
}

LogMeta meta_from_json(const nlohmann::json& j) {
  try {
    return {j.at("log_id").get<std::string>(), j.value("scenario_ref", ""),
            j.at("aps").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("invalid log metadata: ") + e.what());
  }
}

void check_time_ordered(std::span<const ProbeEvent> events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    validate(events[i]);
    if (i > 0 && events[i].timestamp < events[i - 1].timestamp) {
      fail_validation("events must be time-ordered within a batch", {{"index", std::to_string(i)}});
    }
  }
}

void check_time_ordered(std::span<const SightingEvent> events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    validate(events[i]);
    if (i > 0 && events[i].timestamp < events[i - 1].timestamp) {
      fail_validation("sightings must be time-ordered within a batch", {{"index", std::to_string(i)}});
    }
  }
}

void check_range(Seconds from, Seconds to) {
  if (!(from < to)) {
    fail_validation("query range needs from < to",
                    {{"from", codec::format_double(from)}, {"to", codec::format_double(to)}});
  }
}

}  // namespace

Store::Store(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "scenarios");
  fs::create_directories(root_ / "logs");
  fs::create_directories(root_ / "investigations");
  lock_fd_ = ::open((root_ / "LOCK").c_str(), O_RDWR | O_CREAT, 0644);
  if (lock_fd_ < 0) throw Error(ErrorCode::internal, "cannot open lock file under " + root_.string());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorCode::conflict, "data directory " + root_.string() + " is in use by another process");
  }
}

Store::~Store() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

std::string Store::next_id(const std::string& prefix, const fs::path& dir) {
  std::lock_guard lock(ids_mu_);
  // Highest existing suffix + 1, so ids survive restarts.
  std::size_t highest = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto stem = entry.path().stem().string();
    if (stem.rfind(prefix, 0) != 0) continue;
    try {
      highest = std::max<std::size_t>(highest, std::stoul(stem.substr(prefix.size())));
    } catch (const std::exception&) {
    }
  }
  char id[64];
  std::snprintf(id, sizeof id, "%s%06zu", prefix.c_str(), highest + 1);
  // The directory reserves the id.
  fs::create_directories(dir / id);
  return id;
}

std::string Store::put_scenario(const sim::Scenario& scenario) {
  sim::validate(scenario);
  const auto id = next_id("scn-", root_ / "scenarios");
  durable_write(root_ / "scenarios" / id / "scenario.json", codec::to_json(scenario).dump(2) + "\n");
  return id;
}

sim::Scenario Store::get_scenario(const std::string& scenario_id) const {
  require_id(scenario_id, "scenario");
  const auto path = root_ / "scenarios" / scenario_id / "scenario.json";
  if (!fs::exists(path)) fail_not_found("unknown scenario '" + scenario_id + "'", {{"id", scenario_id}});
  return codec::scenario_from_json(codec::parse_json(codec::read_file(path.string()), "scenario"));
}

void Store::put_truth(const std::string& scenario_id, const sim::GroundTruth& truth) {
  require_id(scenario_id, "scenario");
  const auto dir = root_ / "scenarios" / scenario_id;
  if (!fs::exists(dir / "scenario.json")) fail_not_found("unknown scenario '" + scenario_id + "'");
  durable_write(dir / "truth.json", codec::to_json(truth).dump(2) + "\n");
}

sim::GroundTruth Store::get_truth(const std::string& scenario_id) const {
  require_id(scenario_id, "scenario");
  const auto path = root_ / "scenarios" / scenario_id / "truth.json";
  if (!fs::exists(path)) fail_not_found("no ground truth for scenario '" + scenario_id + "'", {{"id", scenario_id}});
  return codec::truth_from_json(codec::parse_json(codec::read_file(path.string()), "ground truth"));
}

std::string Store::create_log(const std::string& scenario_ref, std::vector<std::string> aps) {
  const auto id = next_id("log-", root_ / "logs");
  const auto dir = root_ / "logs" / id;
  fs::create_directories(dir / "events");
  fs::create_directories(dir / "sightings");
  durable_write(dir / "log.json", meta_to_json({id, scenario_ref, std::move(aps)}).dump(2) + "\n");
  return id;
}

Store::LogState& Store::log_state(const std::string& log_id) const {
  require_id(log_id, "log");
  std::lock_guard lock(registry_mu_);
  auto it = logs_.find(log_id);
  if (it != logs_.end()) return *it->second;
  const auto dir = root_ / "logs" / log_id;
  if (!fs::exists(dir / "log.json")) fail_not_found("unknown log '" + log_id + "'", {{"id", log_id}});
  auto state = std::make_unique<LogState>();
  state->dir = dir;
  state->meta = meta_from_json(codec::parse_json(codec::read_file((dir / "log.json").string()), "log metadata"));
  load_segments(*state);
  return *logs_.emplace(log_id, std::move(state)).first->second;
}

void Store::load_segments(LogState& state) const {
  // Rebuilds the in-memory index from the committed segments.
  std::size_t highest = 0;
  for (const auto& segment : sorted_segments(state.dir / "events")) {
    std::ifstream in(segment);
    auto batch = codec::read_probe_log(in);
    state.events.insert(state.events.end(), batch.begin(), batch.end());
    highest = std::max<std::size_t>(highest, std::stoul(segment.stem().string()));
  }
  for (const auto& segment : sorted_segments(state.dir / "sightings")) {
    std::ifstream in(segment);
    auto batch = codec::read_sighting_log(in);
    state.sightings.insert(state.sightings.end(), batch.begin(), batch.end());
    highest = std::max<std::size_t>(highest, std::stoul(segment.stem().string()));
  }
  state.next_segment = highest + 1;
  for (std::size_t i = 0; i < state.events.size(); ++i) state.by_ap[state.events[i].ap_id].push_back(i);
  for (auto& [ap, indices] : state.by_ap) {
    std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      return state.events[a].timestamp < state.events[b].timestamp;
    });
  }
  std::stable_sort(state.sightings.begin(), state.sightings.end(),
                   [](const SightingEvent& a, const SightingEvent& b) { return a.timestamp < b.timestamp; });
}

LogMeta Store::log_meta(const std::string& log_id) const {
  auto& state = log_state(log_id);
  std::shared_lock lock(state.mu);
  return state.meta;
}

std::vector<std::string> Store::list_logs() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_ / "logs")) {
    if (fs::exists(entry.path() / "log.json")) out.push_back(entry.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Store::log_aps(const std::string& log_id) const {
  auto& state = log_state(log_id);
  std::shared_lock lock(state.mu);
  std::vector<std::string> aps = state.meta.aps;
  for (const auto& [ap, indices] : state.by_ap) {
    if (std::find(aps.begin(), aps.end(), ap) == aps.end()) aps.push_back(ap);
  }
  return aps;
}

std::size_t Store::append_events(const std::string& log_id, std::span<const ProbeEvent> events) {
  auto& state = log_state(log_id);
  check_time_ordered(events);
  if (events.empty()) return 0;

  std::lock_guard writer(state.writer_mu);
  std::ostringstream batch;
  codec::write_probe_log(batch, events);
  durable_write(state.dir / "events" / segment_name(state.next_segment), batch.str());

  std::unique_lock lock(state.mu);
  ++state.next_segment;
  const std::size_t base = state.events.size();
  state.events.insert(state.events.end(), events.begin(), events.end());
  std::set<std::string> touched;
  for (std::size_t i = base; i < state.events.size(); ++i) {
    state.by_ap[state.events[i].ap_id].push_back(i);
    touched.insert(state.events[i].ap_id);
  }
  for (const auto& ap : touched) {
    auto& indices = state.by_ap[ap];
    std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      return state.events[a].timestamp < state.events[b].timestamp;
    });
  }
  return events.size();
}

std::size_t Store::append_sightings(const std::string& log_id, std::span<const SightingEvent> events) {
  auto& state = log_state(log_id);
  check_time_ordered(events);
  if (events.empty()) return 0;

  std::lock_guard writer(state.writer_mu);
  std::ostringstream batch;
  codec::write_sighting_log(batch, events);
  durable_write(state.dir / "sightings" / segment_name(state.next_segment), batch.str());

  std::unique_lock lock(state.mu);
  ++state.next_segment;
  state.sightings.insert(state.sightings.end(), events.begin(), events.end());
  std::stable_sort(state.sightings.begin(), state.sightings.end(),
                   [](const SightingEvent& a, const SightingEvent& b) { return a.timestamp < b.timestamp; });
  return events.size();
}

std::vector<ProbeEvent> Store::query_events(const std::string& log_id, const std::string& ap_id, Seconds from,
                                            Seconds to) const {
  check_range(from, to);
  auto& state = log_state(log_id);
  std::shared_lock lock(state.mu);
  std::vector<ProbeEvent> out;
  auto it = state.by_ap.find(ap_id);
  if (it == state.by_ap.end()) return out;
  const auto& indices = it->second;
  auto first = std::lower_bound(indices.begin(), indices.end(), from,
                                [&](std::size_t i, Seconds t) { return state.events[i].timestamp < t; });
  for (; first != indices.end(); ++first) {
    const auto& event = state.events[*first];
    if (!membership(event.timestamp, from, to)) break;
    out.push_back(event);
  }
  return out;
}

std::vector<ProbeEvent> Store::all_events(const std::string& log_id) const {
  auto& state = log_state(log_id);
  std::shared_lock lock(state.mu);
  return state.events;
}

std::vector<SightingEvent> Store::query_sightings(const std::string& log_id, const std::optional<std::string>& ap_id,
                                                  Seconds from, Seconds to) const {
  check_range(from, to);
  auto& state = log_state(log_id);
  std::shared_lock lock(state.mu);
  std::vector<SightingEvent> out;
  auto first = std::lower_bound(state.sightings.begin(), state.sightings.end(), from,
                                [](const SightingEvent& s, Seconds t) { return s.timestamp < t; });
  for (; first != state.sightings.end() && membership(first->timestamp, from, to); ++first) {
    if (!ap_id || first->ap_id == *ap_id) out.push_back(*first);
  }
  return out;
}

void Store::export_log(const std::string& log_id, const fs::path& dir) const {
  auto& state = log_state(log_id);
  std::shared_lock lock(state.mu);
  fs::create_directories(dir);
  std::ostringstream events;
  codec::write_probe_log(events, state.events);
  codec::write_file((dir / "events.tsv").string(), events.str());
  std::ostringstream sightings;
  codec::write_sighting_log(sightings, state.sightings);
  codec::write_file((dir / "sightings.tsv").string(), sightings.str());
  codec::write_file((dir / "log.json").string(), meta_to_json(state.meta).dump(2) + "\n");
}

std::string Store::import_log(const fs::path& dir) {
  const auto events_path = dir / "events.tsv";
  if (!fs::exists(events_path)) fail_not_found("no events.tsv in '" + dir.string() + "'");
  std::ifstream events_in(events_path);
  const auto events = codec::read_probe_log(events_in);
  std::vector<SightingEvent> sightings;
  if (fs::exists(dir / "sightings.tsv")) {
    std::ifstream in(dir / "sightings.tsv");
    sightings = codec::read_sighting_log(in);
  }
  LogMeta meta;
  if (fs::exists(dir / "log.json")) {
    meta = meta_from_json(codec::parse_json(codec::read_file((dir / "log.json").string()), "log metadata"));
  }
  const auto id = create_log(meta.scenario_ref, meta.aps);
  append_events(id, events);
  append_sightings(id, sightings);
  return id;
}

Investigation Store::create_investigation(Investigation draft) {
  std::lock_guard lock(investigations_mu_);
  std::size_t highest = 0;
  for (const auto& entry : fs::directory_iterator(root_ / "investigations")) {
    const auto stem = entry.path().stem().string();
    if (stem.rfind("inv-", 0) != 0) continue;
    try {
      highest = std::max<std::size_t>(highest, std::stoul(stem.substr(4)));
    } catch (const std::exception&) {
    }
  }
  char id[32];
  std::snprintf(id, sizeof id, "inv-%06zu", highest + 1);
  draft.id = id;
  draft.version = 1;
  if (draft.created_at == 0) {
    draft.created_at =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
  }
  validate(draft);
  durable_write(root_ / "investigations" / (draft.id + ".json"), codec::to_json(draft).dump(2) + "\n");
  return draft;
}

void Store::save_investigation(const Investigation& investigation) {
  require_id(investigation.id, "investigation");
  validate(investigation);
  std::lock_guard lock(investigations_mu_);
  durable_write(root_ / "investigations" / (investigation.id + ".json"), codec::to_json(investigation).dump(2) + "\n");
}

Investigation Store::load_investigation(const std::string& id) const {
  require_id(id, "investigation");
  const auto path = root_ / "investigations" / (id + ".json");
  if (!fs::exists(path)) fail_not_found("unknown investigation '" + id + "'", {{"id", id}});
  return codec::investigation_from_json(codec::parse_json(codec::read_file(path.string()), "investigation"));
}

Investigation Store::update_investigation(Investigation next, std::uint64_t expected_version) {
  require_id(next.id, "investigation");
  validate(next);
  std::lock_guard lock(investigations_mu_);
  const auto current = load_investigation(next.id);
  if (current.version != expected_version) {
    throw Error(ErrorCode::conflict, "investigation '" + next.id + "' was modified concurrently",
                {{"current_version", std::to_string(current.version)},
                 {"expected_version", std::to_string(expected_version)}});
  }
  next.version = expected_version + 1;
  durable_write(root_ / "investigations" / (next.id + ".json"), codec::to_json(next).dump(2) + "\n");
  return next;
}

}  // namespace fishing::store

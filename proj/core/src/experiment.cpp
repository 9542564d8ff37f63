#include "fishing/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fishing/error.hpp"

namespace fishing::experiment {

using sim::DeviceProfile;
using sim::Point;
using sim::Rng;
using sim::Role;
using sim::Waypoint;

namespace {

// Five capture APs strung along a plaza, 60 m apart.
constexpr std::array<Point, kCaptureAps> kApPositions{{{0, 0}, {60, 12}, {120, 0}, {180, 12}, {240, 0}}};
constexpr double kCameraRadius = 5.0;
// Far enough from every AP that nothing is received there.
constexpr double kFarOffset = 200.0;
constexpr double kWalkSpeed = 1.2;

// Cameras that captured the culprit, per trial.
constexpr std::array<int, kTrialCount> kCamerasWorking{4, 5, 3, 4, 5, 4, 3, 2, 3, 2};

std::string ap_name(int index) { return "ap" + std::to_string(index + 1); }

struct Stay {
  int ap = 0;
  Seconds arrive = 0.0;
  Seconds leave = 0.0;
};

// The culprit route: stays at every AP in order, walking between them.
struct Route {
  sim::Trajectory trajectory;
  std::vector<Stay> stays;
  Seconds start = 0.0;
  Seconds end = 0.0;
};

Route plan_route(Rng& rng) {
  Route route;
  const Point far_left{kApPositions.front().x - 250.0, 0.0};
  const Point far_right{kApPositions.back().x + 250.0, 0.0};
  Seconds t = rng.uniform(1000.0, 1100.0);
  route.start = t - 200.0;
  route.trajectory.push_back({0.0, far_left});
  route.trajectory.push_back({route.start, far_left});
  for (int i = 0; i < kCaptureAps; ++i) {
    const auto& ap = kApPositions[static_cast<std::size_t>(i)];
    const Point arrive{ap.x - 3.0, ap.y + 1.0};
    const Point leave{ap.x + 3.0, ap.y - 1.0};
    if (i > 0) t += sim::distance(route.trajectory.back().position, arrive) / kWalkSpeed;
    const Seconds stay = rng.uniform(60.0, 90.0);
    route.trajectory.push_back({t, arrive});
    route.trajectory.push_back({t + stay, leave});
    route.stays.push_back({i, t, t + stay});
    t += stay;
  }
  route.end = t + 200.0;
  route.trajectory.push_back({route.end, far_right});
  return route;
}

// Follows `route` with a fixed offset over [from, to]; idle far away before and after.
sim::Trajectory shadow(const Route& route, Seconds from, Seconds to, const Point& offset, const Point& far_before,
                       const Point& far_after, Seconds transit) {
  auto at = [&](Seconds t) {
    const auto p = sim::position_at(route.trajectory, t);
    return Point{p.x + offset.x, p.y + offset.y};
  };
  sim::Trajectory out;
  out.push_back({0.0, far_before});
  if (from - transit > 0.0) out.push_back({from - transit, far_before});
  out.push_back({from, at(from)});
  for (const auto& w : route.trajectory) {
    if (w.t > from && w.t < to) out.push_back({w.t, at(w.t)});
  }
  out.push_back({to, at(to)});
  out.push_back({to + transit, far_after});
  return out;
}

MacAddress universal_mac(Rng& rng, std::set<MacAddress>& used) {
  for (;;) {
    // Clear the locally administered and multicast bits.
    const auto mac = MacAddress::from_u64((rng.next_u64() & 0xFFFFFFFFFFFFULL) & ~(0x03ULL << 40));
    if (used.insert(mac).second) return mac;
  }
}

}  // namespace

TrialPlan trial_plan(int trial_index) {
  if (trial_index < 0 || trial_index >= kTrialCount) {
    fail_validation("trial index must be in [0, " + std::to_string(kTrialCount) + ")");
  }
  static constexpr std::array<std::optional<sim::Emission>, kTrialCount> kCulpritEmission{{
      sim::Emission{2, 10}, sim::Emission{3, 12}, sim::Emission{2, 8}, std::nullopt, sim::Emission{4, 15},
      sim::Emission{2, 10}, sim::Emission{3, 10}, sim::Emission{2, 12}, std::nullopt, sim::Emission{3, 15},
  }};
  TrialPlan plan;
  const auto index = static_cast<std::size_t>(trial_index);
  plan.culprit_emission = kCulpritEmission[index];
  plan.cameras_working = kCamerasWorking[index];
  // The route's first and last APs always keep their cameras.
  switch (plan.cameras_working) {
    case 5: plan.camera_aps = {"ap1", "ap2", "ap3", "ap4", "ap5"}; break;
    case 4: {
      const auto dropped = ap_name(1 + trial_index % 3);
      for (int i = 0; i < kCaptureAps; ++i) {
        if (ap_name(i) != dropped) plan.camera_aps.push_back(ap_name(i));
      }
      break;
    }
    case 3: plan.camera_aps = {"ap1", "ap3", "ap5"}; break;
    default: plan.camera_aps = {"ap1", "ap5"}; break;
  }
  return plan;
}

sim::Scenario make_experiment_scenario(int trial_index, const Knobs& knobs) {
  const auto plan = trial_plan(trial_index);
  Rng rng(sim::derive_seed(knobs.seed, static_cast<std::uint64_t>(trial_index)));

  sim::Scenario scenario;
  scenario.duration = knobs.duration;
  scenario.rf = knobs.rf;
  scenario.seed = sim::derive_seed(knobs.seed, 1000 + static_cast<std::uint64_t>(trial_index));
  for (int i = 0; i < kCaptureAps; ++i) {
    const auto name = ap_name(i);
    const bool working = std::find(plan.camera_aps.begin(), plan.camera_aps.end(), name) != plan.camera_aps.end();
    scenario.aps.push_back({name, kApPositions[static_cast<std::size_t>(i)], kCameraRadius, working});
  }

  const Route route = plan_route(rng);
  std::set<MacAddress> used_macs;
  auto add = [&](Role role, sim::Trajectory trajectory, std::optional<sim::Emission> emission,
                 sim::MacPolicy policy = sim::StaticMac{}) {
    DeviceProfile device;
    device.role = role;
    device.true_mac = universal_mac(rng, used_macs);
    device.trajectory = std::move(trajectory);
    device.emission = emission;
    device.mac_policy = policy;
    scenario.devices.push_back(std::move(device));
  };

  add(Role::culprit, route.trajectory, plan.culprit_emission, knobs.culprit_mac_policy.value_or(sim::StaticMac{}));

  // Stable: parked 6-12 m from an AP all along, probing at least every 25 s.
  const int stable = rng.uniform_int(5, 8);
  for (int i = 0; i < stable; ++i) {
    const auto& ap = kApPositions[static_cast<std::size_t>(i % kCaptureAps)];
    const double r = rng.uniform(6.0, 12.0);
    const double angle = rng.uniform(0.0, 6.283185307179586);
    add(Role::stable, {{0.0, {ap.x + r * std::cos(angle), ap.y + r * std::sin(angle)}}},
        sim::Emission{rng.uniform(4.0, 8.0), rng.uniform(15.0, 25.0)});
  }

  // Long-distance: loiter 25-40 m off an AP around the culprit's stay there.
  const int long_distance = rng.uniform_int(5, 8);
  for (int i = 0; i < long_distance; ++i) {
    const auto& stay = route.stays[static_cast<std::size_t>(i % kCaptureAps)];
    const auto& ap = kApPositions[static_cast<std::size_t>(stay.ap)];
    const double dx = rng.uniform(-10.0, 10.0);
    const Point near{ap.x + dx, ap.y - rng.uniform(25.0, 40.0)};
    const Point far{ap.x + dx, ap.y - kFarOffset};
    const Seconds from = stay.arrive - rng.uniform(60.0, 180.0);
    const Seconds to = stay.leave + rng.uniform(60.0, 180.0);
    add(Role::long_distance, {{0.0, far}, {from - 130.0, far}, {from, near}, {to, near}, {to + 130.0, far}},
        sim::Emission{rng.uniform(3.0, 6.0), rng.uniform(10.0, 30.0)});
  }

  // Partially short: walk with the culprit between two neighbouring APs only.
  const int partial = rng.uniform_int(5, 8);
  for (int i = 0; i < partial; ++i) {
    const auto& first = route.stays[static_cast<std::size_t>(i % (kCaptureAps - 1))];
    const auto& second = route.stays[static_cast<std::size_t>(i % (kCaptureAps - 1) + 1)];
    const auto& ap_a = kApPositions[static_cast<std::size_t>(first.ap)];
    const auto& ap_b = kApPositions[static_cast<std::size_t>(second.ap)];
    const Point offset{rng.uniform(-2.0, 2.0), rng.uniform(0.5, 2.0)};
    add(Role::partially_short,
        shadow(route, first.arrive - 20.0, second.leave + 10.0, offset, {ap_a.x, ap_a.y + kFarOffset},
               {ap_b.x, ap_b.y + kFarOffset}, 160.0),
        sim::Emission{rng.uniform(2.0, 5.0), rng.uniform(8.0, 20.0)});
  }

  // Fully short: an accompanying phone that rotates its MAC every minute.
  add(Role::fully_short,
      shadow(route, route.start, route.end, {-1.2, 1.5}, route.trajectory.front().position,
             route.trajectory.back().position, 1.0),
      sim::Emission{2.0, 8.0}, sim::RandomizeEvery{60.0});

  // Passers-by crossing the plaza once near a random AP.
  const int passers = rng.uniform_int(5, 16);
  for (int i = 0; i < passers; ++i) {
    const auto& ap = kApPositions[static_cast<std::size_t>(rng.uniform_int(0, kCaptureAps - 1))];
    const double x = ap.x + rng.uniform(-25.0, 25.0);
    const Seconds from = rng.uniform(10.0, knobs.duration - 400.0);
    const Seconds crossing = 2.0 * kFarOffset / rng.uniform(1.0, 1.5);
    add(Role::partially_short, {{from, {x, ap.y - kFarOffset}}, {from + crossing, {x, ap.y + kFarOffset}}},
        sim::Emission{rng.uniform(3.0, 10.0), rng.uniform(15.0, 60.0)});
  }

  // Opaque persona labels, shuffled so the numbering says nothing about roles.
  std::vector<int> labels(scenario.devices.size());
  std::iota(labels.begin(), labels.end(), 0);
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  }
  for (std::size_t i = 0; i < scenario.devices.size(); ++i) {
    char label[16];
    std::snprintf(label, sizeof label, "person-%02d", labels[i]);
    scenario.devices[i].persona_id = label;
  }

  sim::validate(scenario);
  return scenario;
}

std::vector<StayingInterval> operator_intervals(const sim::Scenario& scenario, const sim::GroundTruth& truth) {
  std::vector<StayingInterval> out;
  for (const auto& ap : scenario.aps) {
    if (!ap.camera_working) continue;
    const StayingInterval* longest = nullptr;
    for (const auto& span : truth.staying) {
      if (span.ap_id != ap.ap_id) continue;
      if (!longest || span.exit - span.enter > longest->exit - longest->enter) longest = &span;
    }
    if (longest) out.push_back(*longest);
  }
  return out;
}

TrialResult run_trial(int trial_index, const Knobs& knobs, const filter::FilterConfig& cfg) {
  const auto scenario = make_experiment_scenario(trial_index, knobs);
  const auto output = sim::run_scenario(scenario);
  const auto intervals = operator_intervals(scenario, output.truth);

  TrialResult result;
  result.trial = trial_index;
  result.culprit_silent = !trial_plan(trial_index).culprit_emission.has_value();
  result.aps_used = intervals.size();
  result.table = filter::run_filter(output.probes, intervals, cfg);

  std::set<MacAddress> observed;
  for (const auto& probe : output.probes) observed.insert(probe.mac);
  result.observed_macs = observed.size();

  std::set<MacAddress> culprit_macs;
  for (const auto& epoch : output.truth.culprit_macs) culprit_macs.insert(epoch.mac);

  result.enumerated = result.table.rows.size();
  for (const auto& row : result.table.rows) {
    if (culprit_macs.contains(row.mac)) {
      result.culprit_identified = true;
    } else {
      ++result.false_positives;
    }
  }
  result.culprit_top = !result.table.rows.empty() && culprit_macs.contains(result.table.rows.front().mac);
  return result;
}

Summary run_experiment(int trials, const Knobs& knobs, const filter::FilterConfig& cfg, unsigned threads) {
  if (trials < 1 || trials > kTrialCount) {
    fail_validation("trials must be in [1, " + std::to_string(kTrialCount) + "]");
  }
  Summary summary;
  summary.trials.resize(static_cast<std::size_t>(trials));

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(trials));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (int i = next++; i < trials; i = next++) {
          try {
            summary.trials[static_cast<std::size_t>(i)] = run_trial(i, knobs, cfg);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& trial : summary.trials) {
    summary.false_positives += trial.false_positives;
    if (trial.culprit_silent) continue;
    ++summary.emitting_trials;
    if (trial.culprit_identified) ++summary.detected;
    if (trial.culprit_top) ++summary.top_ranked;
  }
  return summary;
}

std::string render_summary_text(const Summary& summary) {
  std::ostringstream out;
  out << "trial  enumerated/observed  aps_used  culprit\n";
  char line[128];
  for (const auto& trial : summary.trials) {
    const char* verdict = trial.culprit_silent ? "- (device silent)"
                          : trial.culprit_top  ? "identified (top sum)"
                          : trial.culprit_identified ? "identified"
                                                     : "missed";
    std::snprintf(line, sizeof line, "%5d  %9zu/%-9zu  %8zu  %s\n", trial.trial, trial.enumerated,
                  trial.observed_macs, trial.aps_used, verdict);
    out << line;
  }
  out << "detected " << summary.detected << '/' << summary.emitting_trials << " emitting trials; top sum "
      << summary.top_ranked << '/' << summary.emitting_trials << "; bystander false positives "
      << summary.false_positives << '\n';
  return out.str();
}

std::string render_summary_machine(const Summary& summary) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& trial : summary.trials) {
    trials.push_back({{"trial", trial.trial},
                      {"culprit_silent", trial.culprit_silent},
                      {"enumerated", trial.enumerated},
                      {"observed_macs", trial.observed_macs},
                      {"aps_used", trial.aps_used},
                      {"culprit_identified", trial.culprit_identified},
                      {"culprit_top", trial.culprit_top},
                      {"false_positives", trial.false_positives}});
  }
  nlohmann::json doc{{"trials", trials},
                     {"emitting_trials", summary.emitting_trials},
                     {"detected", summary.detected},
                     {"top_ranked", summary.top_ranked},
                     {"false_positives", summary.false_positives}};
  return doc.dump(2) + "\n";
}

}  // namespace fishing::experiment

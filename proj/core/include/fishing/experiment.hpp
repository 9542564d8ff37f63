#pragma once

// Seeded re-creation of the five-AP field trial: scenario builder plus a
// batch harness that plays the operator using simulator ground truth.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fishing/filter.hpp"
#include "fishing/simulator.hpp"

namespace fishing::experiment {

inline constexpr std::uint64_t kDefaultSeed = 0x0f15c0de2017ULL;
inline constexpr int kTrialCount = 10;
inline constexpr int kCaptureAps = 5;

struct Knobs {
  std::uint64_t seed = kDefaultSeed;
  /// Overrides the culprit device's MAC policy (all trials).
  std::optional<sim::MacPolicy> culprit_mac_policy;
  sim::RfParams rf{-40.0, 3.0, 4.0, -90.0};
  Seconds duration = 3000.0;
};

/// Per-trial fixed choices: culprit emission (nullopt = silent) and how many
/// cameras captured the culprit.
struct TrialPlan {
  std::optional<sim::Emission> culprit_emission;
  int cameras_working = kCaptureAps;
  /// AP ids (ap1..ap5) with a working camera.
  std::vector<std::string> camera_aps;
};

TrialPlan trial_plan(int trial_index);

/// trial_index in [0, kTrialCount). Trials 3 and 8 carry a silent culprit.
sim::Scenario make_experiment_scenario(int trial_index, const Knobs& knobs);

/// Staying intervals an operator would mark: the culprit's longest span at
/// each AP whose camera works.
std::vector<StayingInterval> operator_intervals(const sim::Scenario& scenario, const sim::GroundTruth& truth);

struct TrialResult {
  int trial = 0;
  bool culprit_silent = false;
  std::size_t observed_macs = 0;
  std::size_t enumerated = 0;
  std::size_t aps_used = 0;
  bool culprit_identified = false;
  bool culprit_top = false;
  std::size_t false_positives = 0;
  filter::SuspiciousRateTable table;
};

struct Summary {
  std::vector<TrialResult> trials;
  std::size_t emitting_trials = 0;
  std::size_t detected = 0;
  std::size_t top_ranked = 0;
  std::size_t false_positives = 0;
};

TrialResult run_trial(int trial_index, const Knobs& knobs, const filter::FilterConfig& cfg);

/// Trials run on `threads` workers; output ordered by trial index.
Summary run_experiment(int trials, const Knobs& knobs, const filter::FilterConfig& cfg, unsigned threads = 0);

std::string render_summary_text(const Summary& summary);
std::string render_summary_machine(const Summary& summary);

}  // namespace fishing::experiment

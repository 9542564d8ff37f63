#include <gtest/gtest.h>

#include <set>

#include "fishing/experiment.hpp"

namespace fishing::experiment {
namespace {

TEST(TrialPlan, SilentTrialsAndCameraCounts) {
  const auto t0 = trial_plan(0);
  ASSERT_TRUE(t0.culprit_emission.has_value());
  EXPECT_EQ(*t0.culprit_emission, (sim::Emission{2, 10}));
  EXPECT_FALSE(trial_plan(3).culprit_emission.has_value());
  EXPECT_FALSE(trial_plan(8).culprit_emission.has_value());
  for (int t = 0; t < kTrialCount; ++t) {
    const auto plan = trial_plan(t);
    EXPECT_EQ(plan.camera_aps.size(), static_cast<std::size_t>(plan.cameras_working));
    EXPECT_GE(plan.cameras_working, 2);
  }
}

TEST(Scenario, FiveApsAndOneCulprit) {
  for (int t = 0; t < kTrialCount; ++t) {
    const auto s = make_experiment_scenario(t, Knobs{});
    EXPECT_EQ(s.aps.size(), 5u);
    int culprits = 0;
    for (const auto& d : s.devices) culprits += d.role == sim::Role::culprit ? 1 : 0;
    EXPECT_EQ(culprits, 1);
    EXPECT_NO_THROW(sim::validate(s));
  }
}

TEST(Scenario, DeterministicPerSeed) {
  EXPECT_EQ(make_experiment_scenario(2, Knobs{}), make_experiment_scenario(2, Knobs{}));
  Knobs other;
  other.seed = 1;
  EXPECT_NE(make_experiment_scenario(2, Knobs{}), make_experiment_scenario(2, other));
}

TEST(OperatorIntervals, OnePerWorkingCamera) {
  for (int t = 0; t < kTrialCount; ++t) {
    const auto s = make_experiment_scenario(t, Knobs{});
    const auto out = sim::run_scenario(s);
    const auto intervals = operator_intervals(s, out.truth);
    EXPECT_EQ(intervals.size(), static_cast<std::size_t>(trial_plan(t).cameras_working));
    std::set<std::string> aps;
    for (const auto& iv : intervals) {
      EXPECT_LT(iv.enter, iv.exit);
      aps.insert(iv.ap_id);
    }
    EXPECT_EQ(aps.size(), intervals.size());
  }
}

TEST(Experiment, DefaultSeedFindsEveryEmittingCulprit) {
  const auto summary = run_experiment(kTrialCount, Knobs{}, filter::FilterConfig{}, 2);
  ASSERT_EQ(summary.trials.size(), static_cast<std::size_t>(kTrialCount));
  EXPECT_EQ(summary.emitting_trials, 8u);
  EXPECT_EQ(summary.detected, 8u);
  EXPECT_GE(summary.top_ranked, 7u);
  for (const auto& trial : summary.trials) {
    EXPECT_GE(trial.observed_macs, 30u);
    EXPECT_LE(trial.observed_macs, 65u);
    if (trial.culprit_silent) EXPECT_EQ(trial.enumerated, 0u);
  }
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  const auto one = run_experiment(4, Knobs{}, filter::FilterConfig{}, 1);
  const auto four = run_experiment(4, Knobs{}, filter::FilterConfig{}, 4);
  EXPECT_EQ(render_summary_machine(one), render_summary_machine(four));
}

TEST(Experiment, RandomizedCulpritIsNotEnumerated) {
  Knobs knobs;
  knobs.culprit_mac_policy = sim::RandomizePerProbe{};
  const auto summary = run_experiment(kTrialCount, knobs, filter::FilterConfig{}, 2);
  EXPECT_EQ(summary.detected, 0u);
  for (const auto& trial : summary.trials) {
    EXPECT_EQ(trial.enumerated, 0u);
    EXPECT_EQ(trial.false_positives, 0u);
  }
}

}  // namespace
}  // namespace fishing::experiment

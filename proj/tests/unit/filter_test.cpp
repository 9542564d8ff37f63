#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fishing/error.hpp"
#include "fishing/filter.hpp"
#include "oracle.hpp"

namespace fishing::filter {
namespace {

using fishing::testing::brute_force_rates;
using fishing::testing::mac_number;
using fishing::testing::OracleConfig;

const MacAddress kA = MacAddress::parse("0a:00:00:00:00:0a");
const MacAddress kB = MacAddress::parse("0b:00:00:00:00:0b");
const MacAddress kC = MacAddress::parse("0c:00:00:00:00:0c");

ProbeEvent probe(double t, const MacAddress& mac, double rssi = -60.0, const std::string& ap = "ap1") {
  return {t, ap, mac, rssi, std::nullopt};
}

FilterConfig two_slots() {
  FilterConfig cfg;
  cfg.slots_per_side = 2;
  return cfg;
}

TEST(LinearWeighting, MatchesFormula) {
  EXPECT_NEAR(linear_weighting(0), 2.0 / 31.0, 1e-15);
  EXPECT_DOUBLE_EQ(linear_weighting(30), 2.0);
  EXPECT_NEAR(linear_weighting(14), 30.0 / 31.0, 1e-15);
}

TEST(LinearWeighting, ThirtySlotsAverageOne) {
  double total = 0.0;
  for (int n = 0; n < 30; ++n) total += linear_weighting(n);
  EXPECT_NEAR(total, 30.0, 1e-12);
}

TEST(SlotPartition, BothSidesTileOutward) {
  const auto slots = slot_partition({"ap1", 1000, 1120}, two_slots());
  const std::vector<TimeSlot> expected{{940, 970, SlotSide::before, 1},
                                       {970, 1000, SlotSide::before, 0},
                                       {1120, 1150, SlotSide::after, 0},
                                       {1150, 1180, SlotSide::after, 1}};
  EXPECT_EQ(slots, expected);
}

TEST(SlotPartition, ZeroSlotsIsEmpty) {
  FilterConfig cfg;
  cfg.slots_per_side = 0;
  EXPECT_TRUE(slot_partition({"ap1", 0, 60}, cfg).empty());
}

TEST(SlotPartition, AfterOnly) {
  FilterConfig cfg;
  cfg.slots_per_side = 1;
  cfg.sides = Sides::after_only;
  const std::vector<TimeSlot> expected{{60, 90, SlotSide::after, 0}};
  EXPECT_EQ(slot_partition({"ap1", 0, 60}, cfg), expected);
}

TEST(SlotPartition, DefaultHasSixtyDisjointSlots) {
  const StayingInterval staying{"ap1", 5000, 5075};
  const auto slots = slot_partition(staying, FilterConfig{});
  ASSERT_EQ(slots.size(), 60u);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    EXPECT_DOUBLE_EQ(slots[i].end - slots[i].start, 30.0);
    EXPECT_FALSE(slots[i].start < staying.exit && staying.enter < slots[i].end);
    if (i > 0) EXPECT_LE(slots[i - 1].end, slots[i].start);
  }
}

TEST(PerApRates, StayingOnlyDeviceWithTwoSlots) {
  const std::vector<ProbeEvent> events{probe(1010, kA), probe(1100, kA)};
  const StayingInterval staying{"ap1", 1000, 1120};
  const auto oracle = brute_force_rates(events, 1000, 1120, OracleConfig{30, 2});
  ASSERT_NEAR(oracle.at(kA), 12.0 / 31.0, 1e-15);  // frozen from the oracle
  const auto rates = per_ap_suspicious_rates(events, staying, two_slots());
  EXPECT_NEAR(rates.rate.at(kA), 12.0 / 31.0, 1e-12);
}

TEST(PerApRates, DeviceInEverySlotScoresZero) {
  const std::vector<ProbeEvent> events{probe(950, kB), probe(980, kB), probe(1050, kB), probe(1130, kB),
                                       probe(1160, kB)};
  const auto rates = per_ap_suspicious_rates(events, {"ap1", 1000, 1120}, two_slots());
  EXPECT_EQ(rates.rate.at(kB), 0.0);
}

TEST(PerApRates, DeviceAbsentDuringStayingIsOmitted) {
  const std::vector<ProbeEvent> events{probe(950, kC), probe(1010, kA), probe(1130, kC)};
  const auto rates = per_ap_suspicious_rates(events, {"ap1", 1000, 1120}, two_slots());
  EXPECT_FALSE(rates.rate.contains(kC));
  EXPECT_FALSE(rates.max_rssi_in_staying.contains(kC));
  EXPECT_TRUE(rates.rate.contains(kA));
}

TEST(PerApRates, ThirtySlotsStayingOnlyReachesSixty) {
  const std::vector<ProbeEvent> events{probe(5010, kA)};
  const auto oracle = brute_force_rates(events, 5000, 5060, OracleConfig{});
  ASSERT_NEAR(oracle.at(kA), 60.0, 1e-12);  // 2 * (2 * 465) / 31
  const auto rates = per_ap_suspicious_rates(events, {"ap1", 5000, 5060}, FilterConfig{});
  EXPECT_NEAR(rates.rate.at(kA), 60.0, 1e-12);
  EXPECT_EQ(rates.rate.at(kA), max_attainable_rate(FilterConfig{}));
}

TEST(PerApRates, EmptyLogIsEmptyResult) {
  const auto rates = per_ap_suspicious_rates({}, {"ap1", 0, 10}, FilterConfig{});
  EXPECT_TRUE(rates.rate.empty());
  EXPECT_EQ(rates.ap_id, "ap1");
}

TEST(PerApRates, TracksMaxRssiDuringStayingOnly) {
  const std::vector<ProbeEvent> events{probe(990, kA, -30.0), probe(1010, kA, -70.0), probe(1020, kA, -65.0)};
  const auto rates = per_ap_suspicious_rates(events, {"ap1", 1000, 1120}, two_slots());
  EXPECT_EQ(rates.max_rssi_in_staying.at(kA), -65.0);
}

TEST(PerApRates, SlotBoundariesAreHalfOpen) {
  // 970 opens before-slot n=0; 1000 is staying; 1120 opens after-slot n=0.
  const std::vector<ProbeEvent> events{probe(1000, kA), probe(970, kA), probe(1120, kA)};
  const auto rates = per_ap_suspicious_rates(events, {"ap1", 1000, 1120}, two_slots());
  // Only the two n=1 slots stay empty.
  EXPECT_NEAR(rates.rate.at(kA), 2 * linear_weighting(1), 1e-15);
}

TEST(PerApRates, RejectsEventsFromOtherAps) {
  const std::vector<ProbeEvent> events{probe(1010, kA, -60, "ap2")};
  EXPECT_THROW(per_ap_suspicious_rates(events, {"ap1", 1000, 1120}, two_slots()), Error);
}

TEST(ExtractCandidates, BothGatesMustPass) {
  FilterConfig cfg;
  cfg.rate_threshold = 0.3;
  PerApRates rates;
  rates.ap_id = "ap1";
  rates.rate = {{kA, 12.0 / 31.0}, {kB, 12.0 / 31.0}, {kC, 0.1}};
  rates.max_rssi_in_staying = {{kA, -60.0}, {kB, -80.0}, {kC, -60.0}};
  EXPECT_EQ(extract_candidates(rates, cfg), std::set<MacAddress>{kA});
}

TEST(ExtractCandidates, GatesAreInclusive) {
  FilterConfig cfg;
  cfg.rate_threshold = 0.5;
  PerApRates rates;
  rates.rate = {{kA, 0.5}};
  rates.max_rssi_in_staying = {{kA, -75.0}};
  EXPECT_EQ(extract_candidates(rates, cfg).size(), 1u);
}

TEST(ExtractCandidates, DefaultThresholdIsHalfTheMaximum) {
  EXPECT_NEAR(effective_rate_threshold(FilterConfig{}), 30.0, 1e-12);
  EXPECT_NEAR(effective_rate_threshold(two_slots()), 6.0 / 31.0, 1e-15);
}

ApResult ap_result(const std::string& ap, std::map<MacAddress, double> rate, std::set<MacAddress> candidates) {
  ApResult result;
  result.rates.ap_id = ap;
  for (const auto& [mac, value] : rate) result.rates.max_rssi_in_staying[mac] = -50.0;
  result.rates.rate = std::move(rate);
  result.candidates = std::move(candidates);
  return result;
}

TEST(Fuse, KeepsMacsCandidateEverywhere) {
  const std::vector<ApResult> per_ap{ap_result("ap1", {{kA, 0.5}, {kB, 0.9}}, {kA, kB}),
                                     ap_result("ap2", {{kA, 0.4}, {kB, 0.9}}, {kA, kB}),
                                     ap_result("ap3", {{kA, 0.6}, {kB, 0.1}}, {kA})};
  const auto table = fuse_across_aps(per_ap, {"ap1", "ap2", "ap3"});
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].mac, kA);
  EXPECT_EQ(table.rows[0].rates, (std::vector<double>{0.5, 0.4, 0.6}));
  EXPECT_NEAR(table.rows[0].sum, 1.5, 1e-15);
  EXPECT_EQ(table.ap_ids, (std::vector<std::string>{"ap1", "ap2", "ap3"}));
}

TEST(Fuse, EmptyTargetSetIsAnError) {
  try {
    fuse_across_aps({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
  }
}

TEST(Fuse, MissingTargetApIsAnError) {
  const std::vector<ApResult> per_ap{ap_result("ap1", {{kA, 1.0}}, {kA})};
  EXPECT_THROW(fuse_across_aps(per_ap, {"ap1", "ap2"}), Error);
}

TEST(Fuse, SortsBySumThenMac) {
  const std::vector<ApResult> per_ap{ap_result("ap1", {{kC, 1.0}, {kA, 2.0}, {kB, 1.0}}, {kA, kB, kC})};
  const auto table = fuse_across_aps(per_ap, {"ap1"});
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_EQ(table.rows[0].mac, kA);
  EXPECT_EQ(table.rows[1].mac, kB);
  EXPECT_EQ(table.rows[2].mac, kC);
}

TEST(RunFilter, SingleApSingleDevice) {
  FilterConfig cfg = two_slots();
  cfg.rate_threshold = 0.3;
  const std::vector<ProbeEvent> events{probe(900, kB), probe(960, kB), probe(985, kB), probe(1010, kA),
                                       probe(1030, kB), probe(1125, kB), probe(1155, kB), probe(1200, kB)};
  const std::vector<StayingInterval> staying{{"ap1", 1000, 1120}};
  const auto table = run_filter(events, staying, cfg);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].mac, kA);
  EXPECT_NEAR(table.rows[0].sum, 12.0 / 31.0, 1e-12);
  EXPECT_TRUE(table.truncated_aps.empty());
}

TEST(RunFilter, BystanderCandidateAtOneApOnlyIsDropped) {
  FilterConfig cfg = two_slots();
  cfg.rate_threshold = 0.3;
  const std::vector<ProbeEvent> events{probe(1010, kA), probe(1020, kB), probe(2010, kA, -55, "ap2"),
                                       probe(2015, kB, -55, "ap2"), probe(2100, kB, -55, "ap2")};
  const std::vector<StayingInterval> staying{{"ap1", 1000, 1060}, {"ap2", 2000, 2060}};
  const auto table = run_filter(events, staying, cfg);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].mac, kA);
  EXPECT_EQ(table.rows[0].rates.size(), 2u);
}

TEST(RunFilter, ApWithoutEventsYieldsEmptyTable) {
  const std::vector<ProbeEvent> events{probe(1010, kA)};
  const std::vector<StayingInterval> staying{{"ap1", 1000, 1060}, {"ap9", 2000, 2060}};
  EXPECT_TRUE(run_filter(events, staying, two_slots()).rows.empty());
}

TEST(RunFilter, DuplicateApIsRejected) {
  const std::vector<StayingInterval> staying{{"ap1", 1000, 1060}, {"ap1", 2000, 2060}};
  EXPECT_THROW(run_filter({}, staying, two_slots()), Error);
}

TEST(RunFilter, NoIntervalsIsRejected) { EXPECT_THROW(run_filter({}, {}, two_slots()), Error); }

TEST(RunFilter, FlagsWindowsBeyondTheLog) {
  const std::vector<ProbeEvent> events{probe(0, kB), probe(1010, kA), probe(1100, kB)};
  const std::vector<StayingInterval> staying{{"ap1", 1000, 1060}};
  const auto table = run_filter(events, staying, two_slots());
  EXPECT_EQ(table.truncated_aps, std::vector<std::string>{"ap1"});
}

TEST(RunFilter, FullyShortCoMoverIsRetained) {
  // A companion seen with the culprit at both APs and nowhere else stays in the table.
  FilterConfig cfg = two_slots();
  cfg.rate_threshold = 0.3;
  const std::vector<ProbeEvent> events{probe(1010, kA), probe(1012, kB), probe(2010, kA, -50, "ap2"),
                                       probe(2012, kB, -52, "ap2")};
  const std::vector<StayingInterval> staying{{"ap1", 1000, 1060}, {"ap2", 2000, 2060}};
  const auto table = run_filter(events, staying, cfg);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0].mac, kA);  // tie broken by MAC
  EXPECT_EQ(table.rows[1].mac, kB);
}

// Property checks over random logs.

class FilterProperties : public ::testing::Test {
 protected:
  static FilterConfig config_for(const fishing::testing::RandomLog& log) {
    FilterConfig cfg;
    cfg.slot_len = log.cfg.slot_len;
    cfg.slots_per_side = log.cfg.slots_per_side;
    cfg.sides = log.cfg.before && log.cfg.after ? Sides::both : log.cfg.before ? Sides::before_only : Sides::after_only;
    return cfg;
  }
  std::mt19937_64 rng{20240611};
};

TEST_F(FilterProperties, MatchesBruteForceOracle) {
  for (int i = 0; i < 300; ++i) {
    const auto log = fishing::testing::random_log(rng);
    const auto expected = brute_force_rates(log.events, log.staying.enter, log.staying.exit, log.cfg);
    const auto actual = per_ap_suspicious_rates(log.events, log.staying, config_for(log));
    ASSERT_EQ(actual.rate.size(), expected.size());
    for (const auto& [mac, rate] : expected) EXPECT_NEAR(actual.rate.at(mac), rate, 1e-9);
  }
}

TEST_F(FilterProperties, OrderIndependent) {
  for (int i = 0; i < 200; ++i) {
    auto log = fishing::testing::random_log(rng);
    const auto cfg = config_for(log);
    const auto before = per_ap_suspicious_rates(log.events, log.staying, cfg);
    std::shuffle(log.events.begin(), log.events.end(), rng);
    EXPECT_EQ(per_ap_suspicious_rates(log.events, log.staying, cfg), before);
  }
}

TEST_F(FilterProperties, RemovingANonStayingObservationNeverLowersRate) {
  for (int i = 0; i < 200; ++i) {
    auto log = fishing::testing::random_log(rng);
    const auto cfg = config_for(log);
    const auto base = per_ap_suspicious_rates(log.events, log.staying, cfg);
    std::vector<std::size_t> outside;
    for (std::size_t e = 0; e < log.events.size(); ++e) {
      if (!membership(log.events[e].timestamp, log.staying)) outside.push_back(e);
    }
    if (outside.empty()) continue;
    auto fewer = log.events;
    fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(outside[rng() % outside.size()]));
    const auto after = per_ap_suspicious_rates(fewer, log.staying, cfg);
    for (const auto& [mac, rate] : base.rate) EXPECT_GE(after.rate.at(mac), rate);
  }
}

TEST_F(FilterProperties, NoRateExceedsTheMaximum) {
  for (int i = 0; i < 200; ++i) {
    const auto log = fishing::testing::random_log(rng);
    const auto cfg = config_for(log);
    for (const auto& [mac, rate] : per_ap_suspicious_rates(log.events, log.staying, cfg).rate) {
      EXPECT_LE(rate, max_attainable_rate(cfg));
      EXPECT_GE(rate, 0.0);
    }
  }
}

}  // namespace
}  // namespace fishing::filter

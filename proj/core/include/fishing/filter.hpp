#pragma once

// Culprit-determination filter: slot partitioning, linear weighting, per-AP
// suspicious rates, candidate extraction and multi-AP fusion.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fishing/events.hpp"
#include "fishing/mac_address.hpp"

namespace fishing::filter {

enum class Sides { before_only, after_only, both };

std::string_view to_string(Sides sides);
Sides parse_sides(std::string_view text);

struct FilterConfig {
  Seconds slot_len = 30.0;
  int slots_per_side = 30;
  Dbm rssi_threshold = -75.0;
  /// Unset means half of max_attainable_rate(*this).
  std::optional<double> rate_threshold;
  Sides sides = Sides::both;

  bool operator==(const FilterConfig&) const = default;
};

void validate(const FilterConfig& cfg);

/// Weight added for a slot n positions away from the staying interval: 2(n+1)/31.
double linear_weighting(int n);

/// Rate of a MAC seen during staying and in none of the configured slots.
double max_attainable_rate(const FilterConfig& cfg);

double effective_rate_threshold(const FilterConfig& cfg);

/// Slots ordered by start time. Before-side slots precede the staying
/// interval, after-side slots follow it; neither side overlaps it.
std::vector<TimeSlot> slot_partition(const StayingInterval& staying, const FilterConfig& cfg);

struct PerApRates {
  std::string ap_id;
  /// Every MAC observed during the staying interval, including those at rate 0.
  std::map<MacAddress, double> rate;
  std::map<MacAddress, Dbm> max_rssi_in_staying;

  bool operator==(const PerApRates&) const = default;
};

/// `events` must all belong to staying.ap_id; events outside the staying
/// interval and its slots are ignored. Order of `events` is irrelevant.
PerApRates per_ap_suspicious_rates(std::span<const ProbeEvent> events, const StayingInterval& staying,
                                   const FilterConfig& cfg);

std::set<MacAddress> extract_candidates(const PerApRates& rates, const FilterConfig& cfg);

struct TableRow {
  MacAddress mac;
  /// One entry per SuspiciousRateTable::ap_ids column.
  std::vector<double> rates;
  double sum = 0.0;

  bool operator==(const TableRow&) const = default;
};

struct SuspiciousRateTable {
  /// Column order; target APs in ascending id order.
  std::vector<std::string> ap_ids;
  /// Sorted by sum descending, then MAC ascending.
  std::vector<TableRow> rows;
  /// APs whose slot window reaches outside the log's time range; absence in
  /// those slots was still counted.
  std::vector<std::string> truncated_aps;

  bool operator==(const SuspiciousRateTable&) const = default;
};

struct ApResult {
  PerApRates rates;
  std::set<MacAddress> candidates;
};

/// Keeps MACs that are candidates at every target AP. Throws
/// Error(validation) on an empty target set or a target AP with no entry.
SuspiciousRateTable fuse_across_aps(std::span<const ApResult> per_ap, const std::set<std::string>& target_aps);

/// Whole pipeline over a mixed-AP log, one staying interval per target AP.
SuspiciousRateTable run_filter(std::span<const ProbeEvent> event_log, std::span<const StayingInterval> staying,
                               const FilterConfig& cfg);

}  // namespace fishing::filter

#include "fishing/filter.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "fishing/error.hpp"

namespace fishing::filter {

std::string_view to_string(Sides sides) {
  switch (sides) {
    case Sides::before_only: return "before_only";
    case Sides::after_only: return "after_only";
    case Sides::both: return "both";
  }
  return "both";
}

Sides parse_sides(std::string_view text) {
  if (text == "before_only") return Sides::before_only;
  if (text == "after_only") return Sides::after_only;
  if (text == "both") return Sides::both;
  fail_validation("unknown sides value '" + std::string(text) + "'", {{"sides", std::string(text)}});
}

void validate(const FilterConfig& cfg) {
  if (!std::isfinite(cfg.slot_len) || !(cfg.slot_len > 0.0)) fail_validation("slot_len must be > 0");
  if (cfg.slots_per_side < 0) fail_validation("slots_per_side must be >= 0");
  if (!std::isfinite(cfg.rssi_threshold)) fail_validation("rssi_threshold must be finite");
  if (cfg.rate_threshold && !(std::isfinite(*cfg.rate_threshold) && *cfg.rate_threshold >= 0.0)) {
    fail_validation("rate_threshold must be >= 0");
  }
}

double linear_weighting(int n) { return 2.0 * static_cast<double>(n + 1) / 31.0; }

namespace {

bool has_before(Sides sides) { return sides != Sides::after_only; }
bool has_after(Sides sides) { return sides != Sides::before_only; }

}  // namespace

double max_attainable_rate(const FilterConfig& cfg) {
  // Same summation order as slot_partition so a staying-only MAC matches exactly.
  double total = 0.0;
  if (has_before(cfg.sides)) {
    for (int n = cfg.slots_per_side - 1; n >= 0; --n) total += linear_weighting(n);
  }
  if (has_after(cfg.sides)) {
    for (int n = 0; n < cfg.slots_per_side; ++n) total += linear_weighting(n);
  }
  return total;
}

double effective_rate_threshold(const FilterConfig& cfg) {
  return cfg.rate_threshold.value_or(0.5 * max_attainable_rate(cfg));
}

std::vector<TimeSlot> slot_partition(const StayingInterval& staying, const FilterConfig& cfg) {
  std::vector<TimeSlot> slots;
  const int k = std::max(cfg.slots_per_side, 0);
  slots.reserve(static_cast<std::size_t>(2 * k));
  if (has_before(cfg.sides)) {
    for (int n = k - 1; n >= 0; --n) {
      slots.push_back({staying.enter - (n + 1) * cfg.slot_len, staying.enter - n * cfg.slot_len, SlotSide::before, n});
    }
  }
  if (has_after(cfg.sides)) {
    for (int n = 0; n < k; ++n) {
      slots.push_back({staying.exit + n * cfg.slot_len, staying.exit + (n + 1) * cfg.slot_len, SlotSide::after, n});
    }
  }
  return slots;
}

PerApRates per_ap_suspicious_rates(std::span<const ProbeEvent> events, const StayingInterval& staying,
                                   const FilterConfig& cfg) {
  validate(staying);
  validate(cfg);

  PerApRates out;
  out.ap_id = staying.ap_id;

  for (const auto& event : events) {
    if (event.ap_id != staying.ap_id) {
      fail_validation("event from AP '" + event.ap_id + "' passed to rates for AP '" + staying.ap_id + "'");
    }
    if (!membership(event.timestamp, staying)) continue;
    auto [it, inserted] = out.max_rssi_in_staying.try_emplace(event.mac, event.rssi);
    if (!inserted) it->second = std::max(it->second, event.rssi);
  }
  if (out.max_rssi_in_staying.empty()) return out;

  const auto slots = slot_partition(staying, cfg);
  std::unordered_map<MacAddress, std::vector<bool>> seen_in_slot;
  for (const auto& [mac, rssi] : out.max_rssi_in_staying) seen_in_slot.emplace(mac, std::vector<bool>(slots.size()));

  for (const auto& event : events) {
    auto seen = seen_in_slot.find(event.mac);
    if (seen == seen_in_slot.end()) continue;
    // Slots are disjoint and sorted by start: the candidate is the last slot
    // starting at or before the timestamp.
    auto next = std::upper_bound(slots.begin(), slots.end(), event.timestamp,
                                 [](Seconds t, const TimeSlot& slot) { return t < slot.start; });
    if (next == slots.begin()) continue;
    const auto index = static_cast<std::size_t>(std::prev(next) - slots.begin());
    if (slots[index].contains(event.timestamp)) seen->second[index] = true;
  }

  for (const auto& [mac, seen] : seen_in_slot) {
    double rate = 0.0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!seen[i]) rate += linear_weighting(slots[i].index_n);
    }
    out.rate.emplace(mac, rate);
  }
  return out;
}

std::set<MacAddress> extract_candidates(const PerApRates& rates, const FilterConfig& cfg) {
  const double rate_threshold = effective_rate_threshold(cfg);
  std::set<MacAddress> candidates;
  for (const auto& [mac, rate] : rates.rate) {
    auto rssi = rates.max_rssi_in_staying.find(mac);
    if (rssi == rates.max_rssi_in_staying.end()) continue;
    if (rssi->second >= cfg.rssi_threshold && rate >= rate_threshold) candidates.insert(mac);
  }
  return candidates;
}

SuspiciousRateTable fuse_across_aps(std::span<const ApResult> per_ap, const std::set<std::string>& target_aps) {
  if (target_aps.empty()) fail_validation("fusion needs at least one target AP");

  std::map<std::string, const ApResult*> by_ap;
  for (const auto& entry : per_ap) {
    if (!by_ap.emplace(entry.rates.ap_id, &entry).second) {
      fail_validation("duplicate per-AP result for '" + entry.rates.ap_id + "'", {{"ap_id", entry.rates.ap_id}});
    }
  }
  std::vector<const ApResult*> columns;
  for (const auto& ap : target_aps) {
    auto it = by_ap.find(ap);
    if (it == by_ap.end()) fail_validation("no per-AP result for target AP '" + ap + "'", {{"ap_id", ap}});
    columns.push_back(it->second);
  }

  SuspiciousRateTable table;
  table.ap_ids.assign(target_aps.begin(), target_aps.end());
  for (const auto& mac : columns.front()->candidates) {
    const bool everywhere = std::all_of(columns.begin(), columns.end(),
                                        [&](const ApResult* column) { return column->candidates.contains(mac); });
    if (!everywhere) continue;
    TableRow row{mac, {}, 0.0};
    for (const auto* column : columns) {
      const double rate = column->rates.rate.at(mac);
      row.rates.push_back(rate);
      row.sum += rate;
    }
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const TableRow& a, const TableRow& b) {
    if (a.sum != b.sum) return a.sum > b.sum;
    return a.mac < b.mac;
  });
  return table;
}

SuspiciousRateTable run_filter(std::span<const ProbeEvent> event_log, std::span<const StayingInterval> staying,
                               const FilterConfig& cfg) {
  validate(cfg);
  if (staying.empty()) fail_validation("at least one staying interval is required");
  std::set<std::string> target_aps;
  for (const auto& interval : staying) {
    validate(interval);
    if (!target_aps.insert(interval.ap_id).second) {
      fail_validation("AP '" + interval.ap_id + "' has more than one staying interval", {{"ap_id", interval.ap_id}});
    }
  }

  std::map<std::string, std::vector<ProbeEvent>> by_ap;
  std::optional<Seconds> log_begin;
  std::optional<Seconds> log_end;
  for (const auto& event : event_log) {
    log_begin = std::min(log_begin.value_or(event.timestamp), event.timestamp);
    log_end = std::max(log_end.value_or(event.timestamp), event.timestamp);
    if (target_aps.contains(event.ap_id)) by_ap[event.ap_id].push_back(event);
  }

  std::vector<ApResult> per_ap;
  std::vector<std::string> truncated;
  per_ap.reserve(staying.size());
  for (const auto& interval : staying) {
    const auto& events = by_ap[interval.ap_id];
    ApResult result{per_ap_suspicious_rates(events, interval, cfg), {}};
    result.candidates = extract_candidates(result.rates, cfg);
    per_ap.push_back(std::move(result));

    const auto slots = slot_partition(interval, cfg);
    if (!slots.empty() && (!log_begin || slots.front().start < *log_begin || slots.back().end > *log_end)) {
      truncated.push_back(interval.ap_id);
    }
  }

  auto table = fuse_across_aps(per_ap, target_aps);
  std::sort(truncated.begin(), truncated.end());
  table.truncated_aps = std::move(truncated);
  return table;
}

}  // namespace fishing::filter

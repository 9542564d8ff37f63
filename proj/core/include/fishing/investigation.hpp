#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fishing/events.hpp"
#include "fishing/filter.hpp"

namespace fishing {

enum class InvestigationStatus { draft, complete };

std::string_view to_string(InvestigationStatus status);
InvestigationStatus parse_investigation_status(std::string_view text);

/// An operator's work on one stored log. `result` is present iff status is complete.
struct Investigation {
  std::string id;
  std::string log_id;
  std::string scenario_ref;
  std::vector<StayingInterval> staying_intervals;
  filter::FilterConfig config;
  std::optional<filter::SuspiciousRateTable> result;
  /// Unix seconds.
  std::int64_t created_at = 0;
  InvestigationStatus status = InvestigationStatus::draft;
  /// Bumped on every write; stale writers get Error(conflict).
  std::uint64_t version = 1;

  bool operator==(const Investigation&) const = default;
};

void validate(const Investigation& investigation);

}  // namespace fishing

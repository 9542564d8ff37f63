#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "fishing/mac_address.hpp"

namespace fishing {

/// Seconds since the scenario epoch.
using Seconds = double;
/// Received signal strength in dBm.
using Dbm = double;

/// One captured probe request.
struct ProbeEvent {
  Seconds timestamp = 0.0;
  std::string ap_id;
  MacAddress mac;
  Dbm rssi = 0.0;
  std::optional<std::string> ssid;

  bool operator==(const ProbeEvent&) const = default;
};

/// Throws Error(validation) unless rssi <= 0, timestamp is finite and ap_id is non-empty.
void validate(const ProbeEvent& event);

/// A camera detection near an AP; stands in for a captured photo.
struct SightingEvent {
  Seconds timestamp = 0.0;
  std::string ap_id;
  std::string persona_id;
  std::string image_ref;

  bool operator==(const SightingEvent&) const = default;
};

void validate(const SightingEvent& event);

/// Operator-marked span [enter, exit) during which the culprit stays near one AP.
struct StayingInterval {
  std::string ap_id;
  Seconds enter = 0.0;
  Seconds exit = 0.0;

  bool operator==(const StayingInterval&) const = default;
};

void validate(const StayingInterval& interval);

/// The one boundary rule used everywhere: enter <= t < exit.
constexpr bool membership(Seconds t, Seconds enter, Seconds exit) { return enter <= t && t < exit; }
constexpr bool membership(Seconds t, const StayingInterval& interval) {
  return membership(t, interval.enter, interval.exit);
}

enum class SlotSide { before, after };

std::string_view to_string(SlotSide side);

/// A non-staying slot [start, end). index_n counts outward from the staying
/// boundary; the slot touching the staying interval has index_n == 0.
struct TimeSlot {
  Seconds start = 0.0;
  Seconds end = 0.0;
  SlotSide side = SlotSide::before;
  int index_n = 0;

  bool contains(Seconds t) const { return membership(t, start, end); }
  bool operator==(const TimeSlot&) const = default;
};

}  // namespace fishing

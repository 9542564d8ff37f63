#include "fishing/events.hpp"

#include <cmath>

#include "fishing/error.hpp"
#include "fishing/investigation.hpp"

namespace fishing {

void validate(const ProbeEvent& event) {
  if (!std::isfinite(event.timestamp)) fail_validation("probe event timestamp is not finite");
  if (event.ap_id.empty()) fail_validation("probe event has an empty ap_id");
  if (!(event.rssi <= 0.0)) {
    fail_validation("probe event rssi must be <= 0 dBm", {{"rssi", std::to_string(event.rssi)}});
  }
}

void validate(const SightingEvent& event) {
  if (!std::isfinite(event.timestamp)) fail_validation("sighting timestamp is not finite");
  if (event.ap_id.empty()) fail_validation("sighting has an empty ap_id");
  if (event.persona_id.empty()) fail_validation("sighting has an empty persona_id");
  if (MacAddress::is_valid(event.persona_id)) {
    fail_validation("persona_id must not look like a MAC address", {{"persona_id", event.persona_id}});
  }
}

void validate(const StayingInterval& interval) {
  if (interval.ap_id.empty()) fail_validation("staying interval has an empty ap_id");
  if (!std::isfinite(interval.enter) || !std::isfinite(interval.exit) || !(interval.enter < interval.exit)) {
    fail_validation("staying interval needs enter < exit",
                    {{"ap_id", interval.ap_id},
                     {"enter", std::to_string(interval.enter)},
                     {"exit", std::to_string(interval.exit)}});
  }
}

std::string_view to_string(SlotSide side) { return side == SlotSide::before ? "before" : "after"; }

std::string_view to_string(InvestigationStatus status) {
  return status == InvestigationStatus::draft ? "draft" : "complete";
}

InvestigationStatus parse_investigation_status(std::string_view text) {
  if (text == "draft") return InvestigationStatus::draft;
  if (text == "complete") return InvestigationStatus::complete;
  fail_validation("unknown investigation status '" + std::string(text) + "'");
}

void validate(const Investigation& investigation) {
  if (investigation.result.has_value() != (investigation.status == InvestigationStatus::complete)) {
    fail_validation("investigation result must be present exactly when status is complete",
                    {{"id", investigation.id}});
  }
  for (const auto& interval : investigation.staying_intervals) validate(interval);
  filter::validate(investigation.config);
}

}  // namespace fishing

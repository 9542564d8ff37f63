#pragma once

// Deterministic crowd and RF simulator producing probe-request and camera
// sighting logs from a scenario description.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fishing/events.hpp"
#include "fishing/mac_address.hpp"

namespace fishing::sim {

inline constexpr int kScenarioSchemaVersion = 1;

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(const Point& a, const Point& b);

struct ApPlacement {
  std::string ap_id;
  Point position;
  double camera_radius = 5.0;
  /// A failed camera records no sightings; its AP still captures probes.
  bool camera_working = true;
  bool operator==(const ApPlacement&) const = default;
};

enum class Role { culprit, stable, long_distance, partially_short, fully_short };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct Waypoint {
  Seconds t = 0.0;
  Point position;
  bool operator==(const Waypoint&) const = default;
};

using Trajectory = std::vector<Waypoint>;

struct Emission {
  Seconds min_interval = 0.0;
  Seconds max_interval = 0.0;
  bool operator==(const Emission&) const = default;
};

struct StaticMac {
  bool operator==(const StaticMac&) const = default;
};
struct RandomizePerProbe {
  bool operator==(const RandomizePerProbe&) const = default;
};
struct RandomizeEvery {
  Seconds period = 0.0;
  bool operator==(const RandomizeEvery&) const = default;
};
using MacPolicy = std::variant<StaticMac, RandomizePerProbe, RandomizeEvery>;

struct DeviceProfile {
  std::string persona_id;
  MacAddress true_mac;
  Role role = Role::stable;
  Trajectory trajectory;
  /// nullopt: the device never probes.
  std::optional<Emission> emission;
  MacPolicy mac_policy = StaticMac{};
  bool operator==(const DeviceProfile&) const = default;
};

struct RfParams {
  Dbm rssi_at_1m = -40.0;
  double path_loss_exponent = 2.0;
  double noise_sigma = 4.0;
  Dbm sensitivity_floor = -90.0;
  bool operator==(const RfParams&) const = default;
};

struct Scenario {
  std::vector<ApPlacement> aps;
  std::vector<DeviceProfile> devices;
  RfParams rf;
  Seconds duration = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const Scenario&) const = default;
};

/// Throws Error(validation) listing the first violated invariant.
void validate(const Scenario& scenario);

struct MacEpoch {
  Seconds valid_from = 0.0;
  MacAddress mac;
  bool operator==(const MacEpoch&) const = default;
};

struct GroundTruth {
  std::string culprit_persona;
  /// Partitions [0, duration): each entry is valid until the next one starts.
  std::vector<MacEpoch> culprit_macs;
  /// Spans where the culprit is inside an AP's camera radius, ordered by enter.
  std::vector<StayingInterval> staying;
  bool operator==(const GroundTruth&) const = default;
};

struct SimulationOutput {
  std::vector<ProbeEvent> probes;
  std::vector<SightingEvent> sightings;
  GroundTruth truth;
};

/// Linear interpolation between bracketing waypoints, clamped outside them.
Point position_at(const Trajectory& trajectory, Seconds t);

/// Log-distance path loss; distances under 1 m are treated as 1 m.
Dbm rssi_at(double distance_m, const RfParams& rf, double noise_draw);

/// Random source with distributions defined here rather than by the standard
/// library, so logs are bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform01();
  double uniform(double lo, double hi);
  /// Integer uniform in [lo, hi].
  int uniform_int(int lo, int hi);
  double standard_normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

/// Mixes a base seed with a stream index (SplitMix64 finaliser).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Emission instants in [0, duration). The first one is at `first_offset`
/// when given, otherwise uniform in [0, min_interval].
std::vector<Seconds> emission_times(const Emission& emission, Seconds duration, Rng& rng,
                                    std::optional<Seconds> first_offset = std::nullopt);
std::vector<Seconds> emission_times(const DeviceProfile& profile, Seconds duration, Rng& rng);

/// Spans where the trajectory lies within `radius` of `center`, clipped to [0, duration).
std::vector<std::pair<Seconds, Seconds>> inside_spans(const Trajectory& trajectory, const Point& center,
                                                      double radius, Seconds duration);

/// Random locally administered unicast address (46 random bits).
MacAddress random_local_mac(Rng& rng);

/// Pure function of the scenario, seed included.
SimulationOutput run_scenario(const Scenario& scenario);

}  // namespace fishing::sim

#include "fishing/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_set>

#include "fishing/error.hpp"

namespace fishing::sim {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string_view to_string(Role role) {
  switch (role) {
    case Role::culprit: return "culprit";
    case Role::stable: return "stable";
    case Role::long_distance: return "long_distance";
    case Role::partially_short: return "partially_short";
    case Role::fully_short: return "fully_short";
  }
  return "stable";
}

Role parse_role(std::string_view text) {
  if (text == "culprit") return Role::culprit;
  if (text == "stable") return Role::stable;
  if (text == "long_distance") return Role::long_distance;
  if (text == "partially_short") return Role::partially_short;
  if (text == "fully_short") return Role::fully_short;
  fail_validation("unknown device role '" + std::string(text) + "'");
}

void validate(const Scenario& scenario) {
  if (!std::isfinite(scenario.duration) || !(scenario.duration > 0.0)) fail_validation("duration must be > 0");
  if (scenario.aps.empty()) fail_validation("scenario needs at least one AP");

  std::set<std::string> ap_ids;
  for (const auto& ap : scenario.aps) {
    if (ap.ap_id.empty()) fail_validation("AP with empty ap_id");
    if (!ap_ids.insert(ap.ap_id).second) fail_validation("duplicate ap_id '" + ap.ap_id + "'", {{"ap_id", ap.ap_id}});
    if (!(ap.camera_radius >= 0.0)) fail_validation("camera_radius must be >= 0", {{"ap_id", ap.ap_id}});
  }

  const auto& rf = scenario.rf;
  if (!(rf.sensitivity_floor < rf.rssi_at_1m)) fail_validation("sensitivity_floor must be below rssi_at_1m");
  if (!(rf.noise_sigma >= 0.0)) fail_validation("noise_sigma must be >= 0");
  if (!(rf.path_loss_exponent > 0.0)) fail_validation("path_loss_exponent must be > 0");

  std::set<std::string> personas;
  std::set<MacAddress> macs;
  int culprits = 0;
  for (const auto& device : scenario.devices) {
    const std::map<std::string, std::string> where{{"persona_id", device.persona_id}};
    if (device.persona_id.empty()) fail_validation("device with empty persona_id");
    if (MacAddress::is_valid(device.persona_id)) fail_validation("persona_id must not look like a MAC address", where);
    if (!personas.insert(device.persona_id).second) fail_validation("duplicate persona_id", where);
    if (!macs.insert(device.true_mac).second) fail_validation("duplicate true_mac " + device.true_mac.to_string(), where);
    if (device.role == Role::culprit) ++culprits;
    if (device.trajectory.empty()) fail_validation("device trajectory is empty", where);
    for (std::size_t i = 1; i < device.trajectory.size(); ++i) {
      if (!(device.trajectory[i - 1].t < device.trajectory[i].t)) {
        fail_validation("waypoint times must be strictly increasing", where);
      }
    }
    if (device.emission) {
      if (!(device.emission->min_interval > 0.0)) fail_validation("min_interval must be > 0", where);
      if (!(device.emission->min_interval <= device.emission->max_interval)) {
        fail_validation("min_interval must not exceed max_interval", where);
      }
    }
    if (const auto* every = std::get_if<RandomizeEvery>(&device.mac_policy); every && !(every->period > 0.0)) {
      fail_validation("randomize_every period must be > 0", where);
    }
  }
  if (culprits != 1) fail_validation("scenario needs exactly one culprit, found " + std::to_string(culprits));
}

Point position_at(const Trajectory& trajectory, Seconds t) {
  if (trajectory.empty()) fail_validation("position_at on an empty trajectory");
  if (t <= trajectory.front().t) return trajectory.front().position;
  if (t >= trajectory.back().t) return trajectory.back().position;
  auto next = std::upper_bound(trajectory.begin(), trajectory.end(), t,
                               [](Seconds value, const Waypoint& w) { return value < w.t; });
  const auto& b = *next;
  const auto& a = *std::prev(next);
  const double u = (t - a.t) / (b.t - a.t);
  return {a.position.x + (b.position.x - a.position.x) * u, a.position.y + (b.position.y - a.position.y) * u};
}

Dbm rssi_at(double distance_m, const RfParams& rf, double noise_draw) {
  return rf.rssi_at_1m - 10.0 * rf.path_loss_exponent * std::log10(std::max(distance_m, 1.0)) +
         rf.noise_sigma * noise_draw;
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

int Rng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
  return lo + static_cast<int>(engine_() % span);
}

double Rng::standard_normal() {
  if (spare_normal_) {
    const double value = *spare_normal_;
    spare_normal_.reset();
    return value;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<Seconds> emission_times(const Emission& emission, Seconds duration, Rng& rng,
                                    std::optional<Seconds> first_offset) {
  std::vector<Seconds> times;
  Seconds t = first_offset ? *first_offset : rng.uniform(0.0, emission.min_interval);
  while (t < duration) {
    times.push_back(t);
    t += rng.uniform(emission.min_interval, emission.max_interval);
  }
  return times;
}

std::vector<Seconds> emission_times(const DeviceProfile& profile, Seconds duration, Rng& rng) {
  if (!profile.emission) return {};
  return emission_times(*profile.emission, duration, rng);
}

std::vector<std::pair<Seconds, Seconds>> inside_spans(const Trajectory& trajectory, const Point& center,
                                                      double radius, Seconds duration) {
  if (trajectory.empty()) fail_validation("inside_spans on an empty trajectory");

  // Linear pieces covering [0, duration), with stationary ends where the
  // trajectory is clamped.
  struct Piece {
    Seconds t0, t1;
    Point a, b;
  };
  std::vector<Piece> pieces;
  const auto& first = trajectory.front();
  const auto& last = trajectory.back();
  if (first.t > 0.0) pieces.push_back({0.0, first.t, first.position, first.position});
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const auto& a = trajectory[i - 1];
    const auto& b = trajectory[i];
    pieces.push_back({a.t, b.t, a.position, b.position});
  }
  if (last.t < duration) pieces.push_back({std::max(last.t, 0.0), duration, last.position, last.position});

  std::vector<std::pair<Seconds, Seconds>> spans;
  auto add = [&](Seconds from, Seconds to) {
    from = std::max(from, 0.0);
    to = std::min(to, duration);
    if (!(from < to)) return;
    if (!spans.empty() && spans.back().second >= from) {
      spans.back().second = std::max(spans.back().second, to);
    } else {
      spans.emplace_back(from, to);
    }
  };

  for (const auto& piece : pieces) {
    if (!(piece.t0 < piece.t1)) continue;
    const double dx = piece.b.x - piece.a.x;
    const double dy = piece.b.y - piece.a.y;
    const double ex = piece.a.x - center.x;
    const double ey = piece.a.y - center.y;
    const double qa = dx * dx + dy * dy;
    const double qb = 2.0 * (dx * ex + dy * ey);
    const double qc = ex * ex + ey * ey - radius * radius;
    if (qa == 0.0) {
      if (qc <= 0.0) add(piece.t0, piece.t1);
      continue;
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    const double u0 = std::max((-qb - root) / (2.0 * qa), 0.0);
    const double u1 = std::min((-qb + root) / (2.0 * qa), 1.0);
    if (!(u0 < u1)) continue;
    const double span = piece.t1 - piece.t0;
    add(piece.t0 + u0 * span, piece.t0 + u1 * span);
  }
  return spans;
}

MacAddress random_local_mac(Rng& rng) {
  // Set the locally administered bit, clear the multicast bit.
  std::uint64_t bits = rng.next_u64() & 0xFFFFFFFFFFFFULL;
  bits = (bits & ~(0x01ULL << 40)) | (0x02ULL << 40);
  return MacAddress::from_u64(bits);
}

namespace {

// Hands out fresh random MACs that collide with nothing issued before.
class MacRegistry {
 public:
  explicit MacRegistry(const Scenario& scenario) {
    for (const auto& device : scenario.devices) issued_.insert(device.true_mac);
  }

  MacAddress fresh(Rng& rng) {
    for (;;) {
      auto mac = random_local_mac(rng);
      if (issued_.insert(mac).second) return mac;
    }
  }

 private:
  std::unordered_set<MacAddress> issued_;
};

constexpr std::uint64_t kMacStreamOffset = 1ULL << 32;

}  // namespace

SimulationOutput run_scenario(const Scenario& scenario) {
  validate(scenario);

  SimulationOutput out;
  MacRegistry registry(scenario);

  for (std::size_t d = 0; d < scenario.devices.size(); ++d) {
    const auto& device = scenario.devices[d];
    Rng rng(derive_seed(scenario.seed, d));
    Rng mac_rng(derive_seed(scenario.seed, kMacStreamOffset + d));

    const auto times = emission_times(device, scenario.duration, rng);

    std::vector<MacEpoch> history;
    std::vector<MacAddress> macs_per_emission;
    macs_per_emission.reserve(times.size());
    if (std::holds_alternative<StaticMac>(device.mac_policy)) {
      history.push_back({0.0, device.true_mac});
      macs_per_emission.assign(times.size(), device.true_mac);
    } else if (std::holds_alternative<RandomizePerProbe>(device.mac_policy)) {
      for (std::size_t i = 0; i < times.size(); ++i) {
        auto mac = registry.fresh(mac_rng);
        macs_per_emission.push_back(mac);
        history.push_back({i == 0 ? 0.0 : times[i], mac});
      }
      if (history.empty()) history.push_back({0.0, device.true_mac});
    } else {
      const double period = std::get<RandomizeEvery>(device.mac_policy).period;
      const auto epochs = static_cast<std::size_t>(std::ceil(scenario.duration / period));
      for (std::size_t e = 0; e < std::max<std::size_t>(epochs, 1); ++e) {
        history.push_back({static_cast<double>(e) * period, registry.fresh(mac_rng)});
      }
      for (auto t : times) {
        const auto epoch = std::min(static_cast<std::size_t>(t / period), history.size() - 1);
        macs_per_emission.push_back(history[epoch].mac);
      }
    }

    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto position = position_at(device.trajectory, times[i]);
      for (const auto& ap : scenario.aps) {
        // Drawn for every AP, received or not, so streams stay aligned.
        const double noise = rng.standard_normal();
        const Dbm rssi = rssi_at(distance(position, ap.position), scenario.rf, noise);
        if (rssi < scenario.rf.sensitivity_floor) continue;
        out.probes.push_back({times[i], ap.ap_id, macs_per_emission[i], std::min(rssi, 0.0), std::nullopt});
      }
    }

    if (device.role == Role::culprit) {
      out.truth.culprit_persona = device.persona_id;
      out.truth.culprit_macs = std::move(history);
      for (const auto& ap : scenario.aps) {
        for (auto [enter, exit] : inside_spans(device.trajectory, ap.position, ap.camera_radius, scenario.duration)) {
          out.truth.staying.push_back({ap.ap_id, enter, exit});
        }
      }
    }
  }

  std::map<std::string, std::size_t> ap_order;
  for (std::size_t i = 0; i < scenario.aps.size(); ++i) ap_order.emplace(scenario.aps[i].ap_id, i);
  std::stable_sort(out.probes.begin(), out.probes.end(), [&](const ProbeEvent& a, const ProbeEvent& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    const auto ap_a = ap_order.at(a.ap_id);
    const auto ap_b = ap_order.at(b.ap_id);
    if (ap_a != ap_b) return ap_a < ap_b;
    return a.mac < b.mac;
  });
  std::stable_sort(out.truth.staying.begin(), out.truth.staying.end(),
                   [](const StayingInterval& a, const StayingInterval& b) { return a.enter < b.enter; });

  // Cameras sample once per second.
  const auto seconds = static_cast<long>(std::ceil(scenario.duration));
  for (long s = 0; s < seconds; ++s) {
    const auto t = static_cast<Seconds>(s);
    for (const auto& ap : scenario.aps) {
      if (!ap.camera_working) continue;
      int shot = 0;
      for (const auto& device : scenario.devices) {
        if (distance(position_at(device.trajectory, t), ap.position) > ap.camera_radius) continue;
        char stamp[32];
        std::snprintf(stamp, sizeof stamp, "%06ld-%02d", s, shot++);
        out.sightings.push_back({t, ap.ap_id, device.persona_id, "cam-" + ap.ap_id + "/" + stamp + ".jpg"});
      }
    }
  }
  return out;
}

}  // namespace fishing::sim

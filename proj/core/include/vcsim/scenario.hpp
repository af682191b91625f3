#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vcsim/config.hpp"
#include "vcsim/security.hpp"

namespace vcsim {

struct ScenarioVehicle {
  VehicleId id = 0;
  int lane = 0;
  int heading = 1;          // +1 or -1
  double position_m = 0.0;  // longitudinal, increasing along heading
  double speed_mps = 0.0;
  bool platoon_member = false;
  std::optional<int> platoon_index;  // 1 = head
};

/// Initial highway population. The road is a ring of `road_length_m`; the
/// ring coordinate of a vehicle is wrap(heading * position_m).
struct Scenario {
  double road_length_m = 0.0;
  int platoon_lane = 0;
  std::vector<ScenarioVehicle> vehicles;
  std::vector<VehicleId> platoon;  // platoon[k] is V_{k+1}
};

/// Lateral offset of a lane's centre line.
double lane_offset_m(int lane, const RadioParams& radio);

/// Heading of a lane: the first half runs along +x, the second along -x.
int lane_heading(int lane, int lanes);

/// Deterministic in (config, seed).
Scenario build_scenario(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace vcsim

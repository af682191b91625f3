#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vcsim/security.hpp"
#include "vcsim/time.hpp"

namespace vcsim {

enum class Mode { Cruising, Braking, Stopped, Crashed };

std::string_view to_string(Mode mode);

struct VehicleState {
  VehicleId id = 0;
  int lane = 0;
  int heading = 1;
  double position_m = 0.0;  // front bumper, increasing along heading
  double speed_mps = 0.0;
  Mode mode = Mode::Cruising;
  bool brake_light = false;
  double length_m = 4.0;

  double rear_m() const { return position_m - length_m; }
  bool immobile() const { return mode == Mode::Stopped || mode == Mode::Crashed; }
};

struct DriverState {
  std::optional<SimTime> warned_at;
  SimTime reaction_delay{};
  std::optional<SimTime> braking_from;

  /// First warning fixes the braking instant; later ones are ignored.
  bool warn(SimTime now);
};

/// Advances one vehicle by `dt_s` seconds. Braking is integrated in closed
/// form; a vehicle reaching rest inside the step stops exactly at
/// v²/(2a) from where it was and becomes Stopped.
VehicleState step_kinematics(VehicleState v, double dt_s, double decel_mps2);

/// Switches a cruising vehicle to Braking once its driver's reaction has
/// elapsed. Returns true on the transition.
bool driver_update(VehicleState& v, const DriverState& d, SimTime now);

/// Moves a vehicle across [from, to), starting to brake at the exact
/// instant its driver reacts when that falls inside the interval.
/// Returns true if braking started during the interval.
bool advance_vehicle(VehicleState& v, const DriverState& d, SimTime from, SimTime to,
                     double decel_mps2);

/// Distance between the follower's front and the leader's rear.
double bumper_gap(const VehicleState& follower, const VehicleState& leader);

/// The immediately following driver sees lit brake lights within range.
bool visual_warning_check(const VehicleState& follower, const VehicleState& leader, double gap_m,
                          double visibility_m);

struct CrashEvent {
  VehicleId follower = 0;
  VehicleId leader = 0;
  SimTime time{};
  double contact_m = 0.0;
};

/// Checks each (leader, follower) pair of one lane, head first. A moving
/// follower whose front reaches the leader's rear crashes: both stop dead,
/// the follower is pinned at the contact point.
std::vector<CrashEvent> detect_crashes(std::span<VehicleState> vehicles,
                                       std::span<const VehicleId> head_first, SimTime now);

}  // namespace vcsim

#include "vcsim/mobility.hpp"

#include <algorithm>

namespace vcsim {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Cruising: return "Cruising";
    case Mode::Braking: return "Braking";
    case Mode::Stopped: return "Stopped";
    case Mode::Crashed: return "Crashed";
  }
  return "?";
}

bool DriverState::warn(SimTime now) {
  if (warned_at) return false;
  warned_at = now;
  braking_from = now + reaction_delay;
  return true;
}

VehicleState step_kinematics(VehicleState v, double dt_s, double decel_mps2) {
  switch (v.mode) {
    case Mode::Cruising:
      v.position_m += v.speed_mps * dt_s;
      break;
    case Mode::Braking: {
      v.brake_light = true;
      const double t_stop = v.speed_mps / decel_mps2;
      if (t_stop <= dt_s) {
        v.position_m += v.speed_mps * v.speed_mps / (2.0 * decel_mps2);
        v.speed_mps = 0.0;
        v.mode = Mode::Stopped;
      } else {
        v.position_m += v.speed_mps * dt_s - 0.5 * decel_mps2 * dt_s * dt_s;
        v.speed_mps -= decel_mps2 * dt_s;
      }
      break;
    }
    case Mode::Stopped:
    case Mode::Crashed:
      v.speed_mps = 0.0;
      break;
  }
  return v;
}

bool driver_update(VehicleState& v, const DriverState& d, SimTime now) {
  if (v.mode != Mode::Cruising || !d.braking_from || now < *d.braking_from) return false;
  v.mode = v.speed_mps > 0.0 ? Mode::Braking : Mode::Stopped;
  v.brake_light = true;
  return true;
}

bool advance_vehicle(VehicleState& v, const DriverState& d, SimTime from, SimTime to,
                     double decel_mps2) {
  if (v.mode == Mode::Crashed) return false;
  bool started = false;
  if (v.mode == Mode::Cruising && d.braking_from && *d.braking_from < to) {
    const SimTime onset = std::max(from, *d.braking_from);
    v = step_kinematics(v, to_seconds(onset - from), decel_mps2);
    started = driver_update(v, d, onset);
    from = onset;
  }
  if (to > from) v = step_kinematics(v, to_seconds(to - from), decel_mps2);
  return started;
}

double bumper_gap(const VehicleState& follower, const VehicleState& leader) {
  return leader.rear_m() - follower.position_m;
}

bool visual_warning_check(const VehicleState& /*follower*/, const VehicleState& leader,
                          double gap_m, double visibility_m) {
  return leader.brake_light && gap_m <= visibility_m;
}

std::vector<CrashEvent> detect_crashes(std::span<VehicleState> vehicles,
                                       std::span<const VehicleId> head_first, SimTime now) {
  std::vector<CrashEvent> events;
  for (std::size_t k = 1; k < head_first.size(); ++k) {
    VehicleState& leader = vehicles[head_first[k - 1]];
    VehicleState& follower = vehicles[head_first[k]];
    // Only a moving follower can strike; crashed/stopped ones never move.
    if (follower.immobile()) continue;
    if (follower.position_m < leader.rear_m()) continue;
    follower.position_m = leader.rear_m();
    for (VehicleState* v : {&leader, &follower}) {
      v->speed_mps = 0.0;
      v->mode = Mode::Crashed;
      v->brake_light = true;
    }
    events.push_back({follower.id, leader.id, now, follower.position_m});
  }
  return events;
}

}  // namespace vcsim

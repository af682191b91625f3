#pragma once

#include <optional>

#include "vcsim/mobility.hpp"
#include "vcsim/security.hpp"
#include "vcsim/time.hpp"

namespace vcsim {

struct AppState {
  SimTime beacon_phase{};  // offset inside the beacon slot
  bool warning_active = false;
  bool suppressed = false;
  bool warned = false;  // reached by a radio warning
  bool halted = false;  // crashed: keeps beaconing, sends no new warnings
  std::optional<SimTime> warned_at;
  std::optional<SimTime> suppressed_at;
  SenderState sender;
  std::uint64_t beacons_sent = 0;
  std::uint64_t warnings_sent = 0;

  bool may_warn() const { return warning_active && !suppressed && !halted; }
};

struct AppContext {
  SecurityProfile security;
  SimTime slot = from_millis(100.0);
  double ring_length_m = 0.0;  // 0: open road
};

/// First beacon instant (phase + k·slot) at or after `now`.
SimTime next_beacon_time(const AppState& app, SimTime slot, SimTime now);

/// First warning instant, half a slot off the beacon phase, at or after `now`.
SimTime next_warning_time(const AppState& app, SimTime slot, SimTime now);

/// One periodic beacon carrying the sender's position and heading.
PacketMeta beacon_tick(const VehicleState& v, AppState& app, const AppContext& ctx, SimTime now);

/// Emergency brake of the platoon head: braking starts at once, warnings are
/// armed. Throws std::invalid_argument if `t0` precedes the warm-up end.
void emergency_trigger(VehicleState& head, DriverState& driver, AppState& app, SimTime t0,
                       SimTime warmup_end);

/// A warning packet if the vehicle is currently allowed to warn.
std::optional<PacketMeta> warning_tick(const VehicleState& v, AppState& app, const AppContext& ctx,
                                       SimTime now);

/// Sender strictly behind the receiver along the receiver's heading.
bool sender_is_behind(const PacketMeta& packet, const VehicleState& receiver, double ring_length_m);

struct AppReaction {
  bool newly_warned = false;
  bool newly_suppressed = false;
};

/// Application handling of a delivered packet. A first warning alerts the
/// driver and arms relaying; a warning from behind silences the relay.
AppReaction on_app_receive(const VehicleState& receiver, AppState& app, DriverState& driver,
                           const PacketMeta& packet, const AppContext& ctx, SimTime now);

}  // namespace vcsim

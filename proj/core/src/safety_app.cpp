#include "vcsim/safety_app.hpp"

#include <cmath>
#include <stdexcept>

namespace vcsim {

namespace {

SimTime next_on_grid(SimTime offset, SimTime slot, SimTime now) {
  if (now <= offset) return offset;
  const auto k = (now - offset + slot - SimTime{1}) / slot;
  return offset + slot * k;
}

}  // namespace

SimTime next_beacon_time(const AppState& app, SimTime slot, SimTime now) {
  return next_on_grid(app.beacon_phase, slot, now);
}

SimTime next_warning_time(const AppState& app, SimTime slot, SimTime now) {
  return next_on_grid(app.beacon_phase + slot / 2, slot, now);
}

PacketMeta beacon_tick(const VehicleState& v, AppState& app, const AppContext& ctx, SimTime now) {
  ++app.beacons_sent;
  return make_packet(app.sender, ctx.security, PayloadClass::Beacon, v.position_m, v.heading,
                     v.brake_light, now);
}

void emergency_trigger(VehicleState& head, DriverState& driver, AppState& app, SimTime t0,
                       SimTime warmup_end) {
  if (t0 < warmup_end) {
    throw std::invalid_argument("emergency trigger before the end of warm-up");
  }
  driver.warned_at = t0;
  driver.braking_from = t0;
  if (head.mode == Mode::Cruising) {
    head.mode = head.speed_mps > 0.0 ? Mode::Braking : Mode::Stopped;
  }
  head.brake_light = true;
  app.warning_active = true;
}

std::optional<PacketMeta> warning_tick(const VehicleState& v, AppState& app, const AppContext& ctx,
                                       SimTime now) {
  if (!app.may_warn()) return std::nullopt;
  ++app.warnings_sent;
  return make_packet(app.sender, ctx.security, PayloadClass::Warning, v.position_m, v.heading,
                     v.brake_light, now);
}

bool sender_is_behind(const PacketMeta& packet, const VehicleState& receiver, double ring_length_m) {
  double ahead = packet.sender_position_m - receiver.position_m;
  if (ring_length_m > 0.0) {
    ahead = std::remainder(ahead, ring_length_m);
  }
  return packet.sender_heading == receiver.heading && ahead < 0.0;
}

AppReaction on_app_receive(const VehicleState& receiver, AppState& app, DriverState& driver,
                           const PacketMeta& packet, const AppContext& ctx, SimTime now) {
  AppReaction r;
  if (packet.payload != PayloadClass::Warning) return r;
  if (!app.warned) {
    app.warned = true;
    app.warned_at = now;
    app.warning_active = true;
    driver.warn(now);
    r.newly_warned = true;
  }
  if (!app.suppressed && sender_is_behind(packet, receiver, ctx.ring_length_m)) {
    app.suppressed = true;
    app.suppressed_at = now;
    r.newly_suppressed = true;
  }
  return r;
}

}  // namespace vcsim

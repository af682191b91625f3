#include "vcsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <random>

#include "vcsim/mobility.hpp"
#include "vcsim/radio.hpp"
#include "vcsim/rng.hpp"
#include "vcsim/safety_app.hpp"
#include "vcsim/scenario.hpp"

namespace vcsim {

namespace {

// Lower rank runs first among events sharing a timestamp: frames leave the
// air before anything else happens at that instant.
enum class EventType : int { TxEnd = 0, Mobility = 1, Trigger = 2, Beacon = 3, Warning = 4, Access = 5 };

struct Event {
  SimTime at{};
  EventType type = EventType::Mobility;
  std::uint64_t seq = 0;
  VehicleId node = 0;
  std::uint64_t arg = 0;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.at != b.at) return a.at > b.at;
    if (a.type != b.type) return static_cast<int>(a.type) > static_cast<int>(b.type);
    return a.seq > b.seq;
  }
};

SimTime ceil_div(SimTime t, SimTime step) { return step * ((t.count() + step.count() - 1) / step.count()); }

class Replication final : public MacScheduler {
 public:
  Replication(const ExperimentConfig& config, std::uint64_t seed, const SimulationHooks& hooks)
      : cfg_(config), seed_(seed), hooks_(hooks) {}

  ReplicationResult run();

  void schedule_access(VehicleId node, SimTime at, std::uint64_t token) override {
    push(at, EventType::Access, node, token);
  }
  void schedule_tx_end(std::uint64_t frame_id, SimTime at) override {
    push(at, EventType::TxEnd, 0, frame_id);
  }

 private:
  void push(SimTime at, EventType type, VehicleId node = 0, std::uint64_t arg = 0) {
    queue_.push(Event{at, type, next_seq_++, node, arg});
  }

  void setup();
  void on_mobility(SimTime now);
  void on_trigger(SimTime now);
  void on_beacon(VehicleId node, SimTime now);
  void on_warning(VehicleId node, SimTime now);
  void on_frame_end(const FrameOnAir& frame, SimTime now);
  void receive(VehicleId r, const FrameOnAir& frame, SimTime now);
  void ensure_warning(VehicleId node, SimTime now);
  void refresh_position(VehicleId id);
  bool platoon_immobile() const;
  void finish(bool complete);

  double fading(std::uint64_t frame_id, VehicleId receiver, double distance_m) const {
    CounterRng rng(seed_, Stream::Fading, frame_id, receiver);
    return fading_sample(distance_m, rng, cfg_.radio);
  }

  const ExperimentConfig& cfg_;
  std::uint64_t seed_;
  const SimulationHooks& hooks_;

  Scenario scenario_;
  std::optional<RingGeometry> ring_;
  std::optional<LinkBudget> link_;
  std::unique_ptr<CsmaMac> mac_;
  AppContext ctx_;
  SimTime slot_{};
  SimTime dt_{};
  SimTime trigger_at_{};
  SimTime hard_stop_{};
  SimTime last_mobility_{};

  std::vector<VehicleState> vehicles_;
  std::vector<DriverState> drivers_;
  std::vector<AppState> apps_;
  std::vector<NodePosition> positions_;
  std::vector<bool> warning_scheduled_;
  std::vector<ValidationCache> caches_;
  std::vector<SlotBudget> budgets_;
  std::vector<bool> evaluates_;  // receptions are decided at this vehicle
  std::vector<bool> probe_;
  std::vector<std::int64_t> ledger_of_;
  std::vector<VehicleId> receivers_;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t next_seq_ = 0;
  std::vector<Interferer> interferers_;
  bool done_ = false;

  ReplicationResult out_;
};

void Replication::setup() {
  scenario_ = build_scenario(cfg_, seed_);
  ring_.emplace(scenario_.road_length_m);
  const double tx = effective_tx_power(cfg_.radio, cfg_.nominal_range_m);
  link_.emplace(cfg_.radio, tx);

  ctx_.security = cfg_.security_profile();
  slot_ = from_millis(cfg_.slot_ms());
  ctx_.slot = slot_;
  ctx_.ring_length_m = scenario_.road_length_m;
  dt_ = from_millis(cfg_.mobility_dt_ms);

  const std::size_t n = scenario_.vehicles.size();
  vehicles_.resize(n);
  drivers_.resize(n);
  apps_.resize(n);
  positions_.resize(n);
  warning_scheduled_.assign(n, false);
  caches_.resize(n);
  budgets_.assign(n, SlotBudget(cfg_.processing_budget_ms_per_slot));
  evaluates_.assign(n, cfg_.full_reception);
  probe_.assign(n, false);
  ledger_of_.assign(n, -1);

  const SimTime tau = from_seconds(cfg_.tau_s);
  std::uniform_real_distribution<double> reaction(cfg_.reaction_min_s, cfg_.reaction_max_s);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sv = scenario_.vehicles[i];
    VehicleState& v = vehicles_[i];
    v.id = sv.id;
    v.lane = sv.lane;
    v.heading = sv.heading;
    v.position_m = sv.position_m;
    v.speed_mps = sv.speed_mps;
    v.length_m = cfg_.vehicle_length_m;

    CounterRng rr(seed_, Stream::Reaction, i);
    drivers_[i].reaction_delay = from_seconds(reaction(rr));

    CounterRng br(seed_, Stream::BeaconPhase, i);
    apps_[i].beacon_phase = SimTime{static_cast<SimTime::rep>(br.uniform01() * slot_.count())};
    CounterRng pr(seed_, Stream::PseudonymPhase, i);
    const SimTime phase{static_cast<SimTime::rep>(pr.uniform01() * tau.count())};
    apps_[i].sender.wallet = PseudonymWallet(sv.id, phase, tau);

    refresh_position(sv.id);
  }

  // Measurement receiver(s): the member nearest the platoon midpoint, or all.
  const auto& platoon = scenario_.platoon;
  const double mid = 0.5 * (vehicles_[platoon.front()].position_m + vehicles_[platoon.back()].position_m);
  VehicleId mid_id = platoon.front();
  for (VehicleId id : platoon) {
    if (std::abs(vehicles_[id].position_m - mid) < std::abs(vehicles_[mid_id].position_m - mid)) mid_id = id;
  }
  if (cfg_.measurement_receivers == MeasurementReceivers::AllPlatoon) {
    out_.measured_receivers = platoon;
  } else {
    out_.measured_receivers = {mid_id};
  }

  const SimTime warmup = from_seconds(cfg_.warmup_s);
  trigger_at_ = from_seconds(cfg_.trigger_time_s());
  const SimTime window_end = cfg_.emergency ? trigger_at_ : warmup + from_seconds(cfg_.steady_duration_s);
  const std::int64_t first_slot = ceil_div(warmup, slot_) / slot_;
  const std::int64_t end_slot = window_end / slot_;
  for (VehicleId id : out_.measured_receivers) {
    ledger_of_[id] = static_cast<std::int64_t>(out_.ledgers.size());
    out_.ledgers.emplace_back(first_slot, end_slot);
  }

  for (std::size_t k = 0; k < platoon.size(); ++k) {
    evaluates_[platoon[k]] = true;
    if (cfg_.pdr_probe_stride > 0 && k % static_cast<std::size_t>(cfg_.pdr_probe_stride) == 0) {
      probe_[platoon[k]] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (evaluates_[i]) receivers_.push_back(static_cast<VehicleId>(i));
  }

  hard_stop_ = cfg_.emergency ? trigger_at_ + from_seconds(cfg_.max_after_trigger_s) : window_end;

  out_.seed = seed_;
  out_.vehicles = n;
  out_.ring_length_m = scenario_.road_length_m;
  out_.tx_power_dbm = tx;
  out_.crashes.platoon_size = static_cast<int>(platoon.size());

  if (cfg_.v2v) {
    mac_ = std::make_unique<CsmaMac>(cfg_.radio, *link_, *ring_, std::span<const NodePosition>(positions_),
                                     seed_, *this);
    for (std::size_t i = 0; i < n; ++i) {
      push(next_beacon_time(apps_[i], slot_, SimTime::zero()), EventType::Beacon, static_cast<VehicleId>(i));
    }
  }
  push(dt_, EventType::Mobility);
  if (cfg_.emergency) push(trigger_at_, EventType::Trigger);
}

void Replication::refresh_position(VehicleId id) {
  const VehicleState& v = vehicles_[id];
  positions_[id].x_m = ring_->wrap(v.heading * v.position_m);
  positions_[id].y_m = lane_offset_m(v.lane, cfg_.radio);
}

bool Replication::platoon_immobile() const {
  return std::all_of(scenario_.platoon.begin(), scenario_.platoon.end(),
                     [&](VehicleId id) { return vehicles_[id].immobile(); });
}

void Replication::ensure_warning(VehicleId node, SimTime now) {
  if (!cfg_.v2v || warning_scheduled_[node] || !apps_[node].may_warn()) return;
  warning_scheduled_[node] = true;
  push(next_warning_time(apps_[node], slot_, now), EventType::Warning, node);
}

void Replication::on_mobility(SimTime now) {
  const SimTime from = last_mobility_;
  last_mobility_ = now;
  const double decel = cfg_.decel_mps2;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const bool started = advance_vehicle(vehicles_[i], drivers_[i], from, now, decel);
    if (started && scenario_.vehicles[i].platoon_member) {
      // A braking platoon driver relays the hazard whatever alerted them.
      apps_[i].warning_active = true;
      ensure_warning(static_cast<VehicleId>(i), now);
    }
  }

  const auto& platoon = scenario_.platoon;
  for (const CrashEvent& e : detect_crashes(vehicles_, platoon, now)) {
    for (VehicleId id : {e.follower, e.leader}) {
      apps_[id].halted = true;
      const auto idx = static_cast<std::size_t>(*scenario_.vehicles[id].platoon_index - 1);
      if (!out_.crashes.crashed_s[idx]) out_.crashes.crashed_s[idx] = to_seconds(now);
    }
    out_.crashes.events.push_back(e);
  }

  for (std::size_t k = 1; k < platoon.size(); ++k) {
    const VehicleState& leader = vehicles_[platoon[k - 1]];
    VehicleState& follower = vehicles_[platoon[k]];
    if (visual_warning_check(follower, leader, bumper_gap(follower, leader), cfg_.brake_light_visibility_m)) {
      drivers_[platoon[k]].warn(now);
    }
  }

  for (std::size_t i = 0; i < vehicles_.size(); ++i) refresh_position(static_cast<VehicleId>(i));

  if (cfg_.emergency && now >= trigger_at_ && platoon_immobile()) {
    finish(true);
    return;
  }
  if (now >= hard_stop_) {
    finish(false);
    return;
  }
  push(now + dt_, EventType::Mobility);
}

void Replication::on_trigger(SimTime now) {
  const VehicleId head = scenario_.platoon.front();
  emergency_trigger(vehicles_[head], drivers_[head], apps_[head], now, from_seconds(cfg_.warmup_s));
  ensure_warning(head, now);
}

void Replication::on_beacon(VehicleId node, SimTime now) {
  mac_->enqueue(node, beacon_tick(vehicles_[node], apps_[node], ctx_, now), now);
  push(now + slot_, EventType::Beacon, node);
}

void Replication::on_warning(VehicleId node, SimTime now) {
  auto packet = warning_tick(vehicles_[node], apps_[node], ctx_, now);
  if (!packet) {
    warning_scheduled_[node] = false;
    return;
  }
  mac_->enqueue(node, *packet, now);
  push(now + slot_, EventType::Warning, node);
}

void Replication::on_frame_end(const FrameOnAir& frame, SimTime now) {
  for (VehicleId r : receivers_) {
    if (r != frame.tx) receive(r, frame, now);
  }
}

void Replication::receive(VehicleId r, const FrameOnAir& frame, SimTime now) {
  const double d = ring_->distance(positions_[r], frame.tx_pos);
  const bool relevant = frame.packet.sender_heading == vehicles_[r].heading && d <= cfg_.nominal_range_m;
  const bool probe = probe_[r] && d <= cfg_.pdr_max_m;
  if (!relevant && !probe) return;

  ++out_.reception_checks;
  bool self_busy = false;
  for (const OverlapRecord& o : frame.overlaps) {
    if (o.tx == r && o.start < frame.end && o.end > frame.start) self_busy = true;
  }
  const double signal = self_busy ? 0.0 : link_->mean_rx_mw(d) * fading(frame.id, r, d);
  // Interference only matters once the signal clears the noise floor.
  bool ok = false;
  if (!self_busy && signal >= link_->sinr_threshold() * link_->noise_mw()) {
    interferers_.clear();
    for (const OverlapRecord& o : frame.overlaps) {
      if (o.start >= frame.end || o.end <= frame.start) continue;
      const double di = ring_->distance(positions_[r], o.tx_pos);
      interferers_.push_back({o.start, o.end, link_->mean_rx_mw(di) * fading(o.frame_id, r, di)});
    }
    ReceptionInput in;
    in.start = frame.start;
    in.end = frame.end;
    in.signal_mw = signal;
    in.noise_mw = link_->noise_mw();
    in.sinr_threshold = link_->sinr_threshold();
    in.interferers = interferers_;
    ok = reception_decision(in);
  }
  if (ok && hooks_.force_loss && hooks_.force_loss(frame.packet, r)) ok = false;

  if (probe) out_.pdr.record(d, ok);
  if (!ok) return;
  ++out_.receptions_ok;
  if (!relevant) return;

  const std::int64_t slot = now / slot_;
  ValidationCache& cache = caches_[r];
  ReceiveOutcome outcome = preview_decision(frame.packet, cache, ctx_.security);
  const bool admitted = budgets_[r].admit(slot, outcome.cost_ms);
  if (admitted && outcome.decision == Decision::ValidateLongAndProcess) {
    if (!cache.insert(frame.packet.pseudonym_id)) {
      throw InvariantViolation("validation-cache at-most-once", "pseudonym validated twice");
    }
    ++out_.long_validations;
  }
  if (ledger_of_[r] >= 0) {
    out_.ledgers[static_cast<std::size_t>(ledger_of_[r])].record(slot, frame.packet.kind, outcome.decision,
                                                                 admitted, outcome.cost_ms);
  }

  const bool delivered =
      admitted && (outcome.delivers() || hooks_.deliver_unvalidated_shorts);
  if (hooks_.on_delivery) {
    hooks_.on_delivery(DeliveryRecord{r, frame.packet, outcome.decision, admitted, delivered, now});
  }
  if (!delivered || !scenario_.vehicles[r].platoon_member) return;
  const AppReaction reaction = on_app_receive(vehicles_[r], apps_[r], drivers_[r], frame.packet, ctx_, now);
  if (reaction.newly_warned) ensure_warning(r, now);
}

void Replication::finish(bool complete) {
  done_ = true;
  out_.end_time = last_mobility_;
  CrashReport& c = out_.crashes;
  c.complete = complete;
  c.crashed = 0;
  for (std::size_t k = 0; k < scenario_.platoon.size(); ++k) {
    const VehicleId id = scenario_.platoon[k];
    if (vehicles_[id].mode == Mode::Crashed) ++c.crashed;
    if (drivers_[id].warned_at) c.warned_s[k] = to_seconds(*drivers_[id].warned_at);
  }
}

ReplicationResult Replication::run() {
  setup();
  out_.crashes.warned_s.assign(scenario_.platoon.size(), std::nullopt);
  out_.crashes.crashed_s.assign(scenario_.platoon.size(), std::nullopt);

  while (!done_ && !queue_.empty()) {
    const Event e = queue_.top();
    queue_.pop();
    ++out_.events;
    switch (e.type) {
      case EventType::Mobility: on_mobility(e.at); break;
      case EventType::Trigger: on_trigger(e.at); break;
      case EventType::Beacon: on_beacon(e.node, e.at); break;
      case EventType::Warning: on_warning(e.node, e.at); break;
      case EventType::Access: mac_->on_access(e.node, e.arg, e.at); break;
      case EventType::TxEnd: on_frame_end(mac_->on_tx_end(e.arg, e.at), e.at); break;
    }
  }
  if (!done_) finish(false);

  if (mac_) out_.mac = mac_->counters();
  for (const auto& ledger : out_.ledgers) {
    for (const SlotCounts& s : ledger.slots()) {
      if (s.accounted() != s.received()) {
        throw InvariantViolation("ledger conservation", "per-slot outcomes do not sum to receptions");
      }
      if (s.processed_long > s.received_long || s.processed_short > s.received_short) {
        throw InvariantViolation("ledger conservation", "processed exceeds received");
      }
      if (cfg_.processing_budget_ms_per_slot && s.busy_ms > cfg_.slot_ms() + 1e-9) {
        throw InvariantViolation("processing budget", "busy time exceeds the slot");
      }
    }
    auto stats = processing_stats(ledger, cfg_.scheme == Scheme::NoSecurity);
    if (out_.processing.empty()) {
      out_.processing = std::move(stats);
    } else {
      for (std::size_t k = 0; k < stats.size(); ++k) {
        out_.processing[k].received.merge(stats[k].received);
        out_.processing[k].processed.merge(stats[k].processed);
      }
    }
  }
  if (out_.processing.empty()) {
    out_.processing = processing_stats(ProcessingLedger{}, cfg_.scheme == Scheme::NoSecurity);
  }
  return std::move(out_);
}

}  // namespace

ReplicationResult run_replication(const ExperimentConfig& config, std::uint64_t seed,
                                  const SimulationHooks& hooks) {
  validate(config);
  Replication rep(config, seed, hooks);
  return rep.run();
}

}  // namespace vcsim

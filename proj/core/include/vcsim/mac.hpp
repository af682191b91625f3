#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vcsim/radio.hpp"
#include "vcsim/rng.hpp"
#include "vcsim/security.hpp"
#include "vcsim/time.hpp"

namespace vcsim {

/// Antenna position: x along the (ring) road, y across lanes.
struct NodePosition {
  double x_m = 0.0;
  double y_m = 0.0;
};

/// Closed highway of fixed circumference; distances wrap around.
class RingGeometry {
 public:
  explicit RingGeometry(double circumference_m) : circumference_m_(circumference_m) {}

  double circumference() const { return circumference_m_; }
  double wrap(double x) const;
  /// Signed shortest longitudinal offset from `from` to `to`.
  double longitudinal_offset(double from, double to) const;
  double distance(const NodePosition& a, const NodePosition& b) const;

 private:
  double circumference_m_;
};

/// Another frame that shared the air with a given frame.
struct OverlapRecord {
  std::uint64_t frame_id = 0;
  VehicleId tx = 0;
  NodePosition tx_pos{};
  SimTime start{};
  SimTime end{};
};

struct FrameOnAir {
  std::uint64_t id = 0;
  VehicleId tx = 0;
  NodePosition tx_pos{};
  SimTime start{};
  SimTime end{};
  PacketMeta packet{};
  std::vector<OverlapRecord> overlaps;
};

/// Event hooks the MAC needs from the surrounding event loop.
class MacScheduler {
 public:
  virtual ~MacScheduler() = default;
  virtual void schedule_access(VehicleId node, SimTime at, std::uint64_t token) = 0;
  virtual void schedule_tx_end(std::uint64_t frame_id, SimTime at) = 0;
};

struct MacCounters {
  std::uint64_t enqueued = 0;
  std::uint64_t replaced = 0;  // stale waiting packet overwritten by a fresh one
  std::uint64_t transmitted = 0;
};

/// Broadcast CSMA/CA: carrier sense on aggregate mean power, AIFS, backoff
/// in [0, cw_min] slots frozen while busy. No ACK, no retry, no RTS/CTS.
/// Each node keeps at most one waiting packet per payload class.
class CsmaMac {
 public:
  CsmaMac(const RadioParams& params, const LinkBudget& link, RingGeometry geometry,
          std::span<const NodePosition> positions, std::uint64_t seed, MacScheduler& scheduler);

  void enqueue(VehicleId node, const PacketMeta& packet, SimTime now);

  /// Scheduled access fired; stale tokens are ignored.
  void on_access(VehicleId node, std::uint64_t token, SimTime now);

  /// Ends a transmission and hands the completed frame back.
  FrameOnAir on_tx_end(std::uint64_t frame_id, SimTime now);

  bool transmitting(VehicleId node) const { return nodes_[node].transmitting; }
  bool sensed_busy(VehicleId node) const;
  std::size_t waiting(VehicleId node) const { return nodes_[node].waiting.size(); }
  std::size_t on_air_count() const { return on_air_.size(); }
  std::size_t contender_count() const { return contenders_.size(); }
  const MacCounters& counters() const { return counters_; }

 private:
  struct Node {
    std::vector<PacketMeta> waiting;
    int backoff = -1;  // remaining slots; -1 when none has been drawn
    bool transmitting = false;
    bool busy = false;
    double sensed_mw = 0.0;
    SimTime idle_since{};
    bool access_pending = false;
    SimTime access_at{};
    std::uint64_t token = 0;
    CounterRng rng{0};
  };

  double power_at(VehicleId node, const NodePosition& tx_pos) const;
  double sense(VehicleId node) const;
  int draw_backoff(Node& n);
  void start_contention(VehicleId node, SimTime now, bool post_backoff);
  void schedule_access(VehicleId node, SimTime now);
  void update_state(VehicleId node, SimTime now);
  void add_contender(VehicleId node);
  void remove_contender(VehicleId node);

  RadioParams params_;
  LinkBudget link_;
  RingGeometry geometry_;
  std::span<const NodePosition> positions_;
  MacScheduler& scheduler_;
  SimTime aifs_;
  SimTime slot_;

  std::vector<Node> nodes_;
  std::vector<VehicleId> contenders_;
  std::vector<std::int64_t> contender_index_;
  std::vector<FrameOnAir> on_air_;
  std::uint64_t next_frame_id_ = 1;
  MacCounters counters_;
};

}  // namespace vcsim

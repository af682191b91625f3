#include "vcsim/mac.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <random>
#include <stdexcept>

namespace vcsim {

double RingGeometry::wrap(double x) const {
  double w = std::fmod(x, circumference_m_);
  return w < 0.0 ? w + circumference_m_ : w;
}

double RingGeometry::longitudinal_offset(double from, double to) const {
  double d = to - from;
  if (std::abs(d) >= 1.5 * circumference_m_) d = wrap(d);
  const double half = 0.5 * circumference_m_;
  if (d > half) return d - circumference_m_;
  if (d <= -half) return d + circumference_m_;
  return d;
}

double RingGeometry::distance(const NodePosition& a, const NodePosition& b) const {
  const double dx = longitudinal_offset(a.x_m, b.x_m);
  const double dy = a.y_m - b.y_m;
  return std::sqrt(dx * dx + dy * dy);
}

CsmaMac::CsmaMac(const RadioParams& params, const LinkBudget& link, RingGeometry geometry,
                 std::span<const NodePosition> positions, std::uint64_t seed,
                 MacScheduler& scheduler)
    : params_(params),
      link_(link),
      geometry_(geometry),
      positions_(positions),
      scheduler_(scheduler),
      aifs_(from_micros(params.aifs_us)),
      slot_(from_micros(params.slot_time_us)),
      nodes_(positions.size()),
      contender_index_(positions.size(), -1) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    nodes_[i].rng = CounterRng(seed, Stream::Backoff, i);
  }
}

double CsmaMac::power_at(VehicleId node, const NodePosition& tx_pos) const {
  return link_.mean_rx_mw(geometry_.distance(positions_[node], tx_pos));
}

double CsmaMac::sense(VehicleId node) const {
  double sum = 0.0;
  for (const auto& f : on_air_) {
    if (f.tx != node) sum += power_at(node, f.tx_pos);
  }
  return sum;
}

bool CsmaMac::sensed_busy(VehicleId node) const {
  return sense(node) >= link_.carrier_sense_mw();
}

int CsmaMac::draw_backoff(Node& n) {
  std::uniform_int_distribution<int> dist(0, params_.cw_min);
  return dist(n.rng);
}

void CsmaMac::add_contender(VehicleId node) {
  if (contender_index_[node] >= 0) return;
  contender_index_[node] = static_cast<std::int64_t>(contenders_.size());
  contenders_.push_back(node);
}

void CsmaMac::remove_contender(VehicleId node) {
  const auto idx = contender_index_[node];
  if (idx < 0) return;
  const VehicleId last = contenders_.back();
  contenders_[static_cast<std::size_t>(idx)] = last;
  contender_index_[last] = idx;
  contenders_.pop_back();
  contender_index_[node] = -1;
}

void CsmaMac::schedule_access(VehicleId node, SimTime now) {
  Node& n = nodes_[node];
  n.access_at = now + aifs_ + slot_ * std::max(n.backoff, 0);
  n.access_pending = true;
  scheduler_.schedule_access(node, n.access_at, ++n.token);
}

void CsmaMac::start_contention(VehicleId node, SimTime now, bool post_backoff) {
  Node& n = nodes_[node];
  add_contender(node);
  n.sensed_mw = sense(node);
  n.busy = n.sensed_mw >= link_.carrier_sense_mw();
  n.backoff = post_backoff ? draw_backoff(n) : -1;
  if (n.busy) {
    if (n.backoff < 0) n.backoff = draw_backoff(n);
    n.access_pending = false;
    ++n.token;
    return;
  }
  n.idle_since = now;
  schedule_access(node, now);
}

void CsmaMac::update_state(VehicleId node, SimTime now) {
  Node& n = nodes_[node];
  const bool busy = n.sensed_mw >= link_.carrier_sense_mw();
  if (busy == n.busy) return;
  if (busy) {
    // A node whose access instant is now cannot sense a frame that starts
    // in the same instant; both go on air.
    if (n.access_pending && n.access_at <= now) return;
    if (n.backoff < 0) {
      n.backoff = draw_backoff(n);
    } else {
      const SimTime counted = now - (n.idle_since + aifs_);
      if (counted > SimTime::zero()) {
        n.backoff = std::max<int>(0, n.backoff - static_cast<int>(counted / slot_));
      }
    }
    n.access_pending = false;
    ++n.token;
    n.busy = true;
  } else {
    n.busy = false;
    n.idle_since = now;
    schedule_access(node, now);
  }
}

void CsmaMac::enqueue(VehicleId node, const PacketMeta& packet, SimTime now) {
  Node& n = nodes_[node];
  ++counters_.enqueued;
  for (auto& w : n.waiting) {
    if (w.payload == packet.payload) {
      w = packet;
      ++counters_.replaced;
      return;
    }
  }
  n.waiting.push_back(packet);
  if (!n.transmitting && n.waiting.size() == 1) start_contention(node, now, false);
}

void CsmaMac::on_access(VehicleId node, std::uint64_t token, SimTime now) {
  Node& n = nodes_[node];
  if (!n.access_pending || token != n.token || n.transmitting || n.waiting.empty()) return;
  n.access_pending = false;
  n.backoff = -1;
  n.transmitting = true;
  remove_contender(node);

  FrameOnAir frame;
  frame.id = next_frame_id_++;
  frame.tx = node;
  frame.tx_pos = positions_[node];
  frame.start = now;
  frame.packet = n.waiting.front();
  frame.end = now + airtime(frame.packet.size_bytes, params_);
  n.waiting.erase(n.waiting.begin());
  ++counters_.transmitted;

  for (auto& other : on_air_) {
    other.overlaps.push_back({frame.id, frame.tx, frame.tx_pos, frame.start, frame.end});
    frame.overlaps.push_back({other.id, other.tx, other.tx_pos, other.start, other.end});
  }
  scheduler_.schedule_tx_end(frame.id, frame.end);
  const NodePosition tx_pos = frame.tx_pos;
  on_air_.push_back(std::move(frame));

  for (VehicleId c : contenders_) {
    nodes_[c].sensed_mw += power_at(c, tx_pos);
    update_state(c, now);
  }
}

FrameOnAir CsmaMac::on_tx_end(std::uint64_t frame_id, SimTime now) {
  auto it = std::find_if(on_air_.begin(), on_air_.end(),
                         [&](const FrameOnAir& f) { return f.id == frame_id; });
  if (it == on_air_.end()) throw std::logic_error("tx end for a frame that is not on air");
  FrameOnAir frame = std::move(*it);
  on_air_.erase(it);

  const bool quiet = on_air_.empty();
  for (VehicleId c : contenders_) {
    Node& n = nodes_[c];
    n.sensed_mw = quiet ? 0.0 : n.sensed_mw - power_at(c, frame.tx_pos);
    update_state(c, now);
  }

  Node& n = nodes_[frame.tx];
  n.transmitting = false;
  if (!n.waiting.empty()) start_contention(frame.tx, now, true);
  return frame;
}

}  // namespace vcsim

#include "vcsim/security.hpp"

#include <cassert>
#include <cmath>
#include <numeric>

namespace vcsim {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::NoSecurity: return "NoSecurity";
    case Scheme::BP: return "BP";
    case Scheme::Hybrid: return "Hybrid";
  }
  return "?";
}

std::string_view to_string(PacketKind kind) {
  switch (kind) {
    case PacketKind::Long: return "LONG";
    case PacketKind::Short: return "SHORT";
    case PacketKind::Plain: return "PLAIN";
  }
  return "?";
}

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::ValidateLongAndProcess: return "ValidateLongAndProcess";
    case Decision::SkipCachedLong: return "SkipCachedLong";
    case Decision::ProcessShort: return "ProcessShort";
    case Decision::DropUnvalidatedShort: return "DropUnvalidatedShort";
    case Decision::ProcessPlain: return "ProcessPlain";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view text) {
  if (text == "NoSecurity") return Scheme::NoSecurity;
  if (text == "BP") return Scheme::BP;
  if (text == "Hybrid") return Scheme::Hybrid;
  return std::nullopt;
}

CryptoCost CostTable::cost(Scheme scheme, PacketKind kind) const {
  if (scheme == Scheme::NoSecurity || kind == PacketKind::Plain) return {};
  if (kind == PacketKind::Short) return short_msg;
  return scheme == Scheme::BP ? bp_long : hybrid_long;
}

PacketKind next_kind(SenderSchedule& schedule, int alpha, int beta) {
  assert(alpha >= 1 && beta >= 0);
  const bool pushing = schedule.messages_since_pseudonym_change < static_cast<std::uint32_t>(beta);
  const bool period_due = !schedule.messages_since_last_long ||
                          *schedule.messages_since_last_long >= static_cast<std::uint32_t>(alpha - 1);
  const PacketKind kind = (pushing || period_due) ? PacketKind::Long : PacketKind::Short;

  ++schedule.messages_since_pseudonym_change;
  if (kind == PacketKind::Long) {
    schedule.messages_since_last_long = 0;
  } else {
    ++*schedule.messages_since_last_long;
  }
  return kind;
}

double mean_packet_size(const SecurityProfile& profile) {
  if (profile.scheme == Scheme::NoSecurity) return profile.payload_bytes;
  const double alpha = profile.alpha;
  const double long_bytes = profile.costs.cost(profile.scheme, PacketKind::Long).overhead_bytes;
  const double short_bytes = profile.costs.short_msg.overhead_bytes;
  return profile.payload_bytes + (long_bytes + (alpha - 1.0) * short_bytes) / alpha;
}

int avg_packet_size(const SecurityProfile& profile) {
  return static_cast<int>(std::lround(mean_packet_size(profile)));
}

PseudonymWallet::PseudonymWallet(VehicleId owner, SimTime phase, SimTime lifetime)
    : owner_(owner), phase_(phase), lifetime_(lifetime) {
  // The pseudonym in use at t = 0 was activated one lifetime before the
  // first change instant.
  current_ = Pseudonym{(static_cast<std::uint64_t>(owner) + 1) << 32, owner, phase - lifetime,
                       lifetime};
}

SimTime PseudonymWallet::change_instant_at_or_before(SimTime now) const {
  const auto since_phase = (now - phase_).count();
  const auto period = lifetime_.count();
  auto k = since_phase / period;
  if (since_phase < 0 && since_phase % period != 0) --k;
  return phase_ + SimTime{k * period};
}

const Pseudonym& PseudonymWallet::rotate(SimTime now) {
  assert(now >= current_.expires_at());
  ++serial_;
  current_ = Pseudonym{((static_cast<std::uint64_t>(owner_) + 1) << 32) | serial_, owner_,
                       change_instant_at_or_before(now), lifetime_};
  return current_;
}

bool PseudonymWallet::refresh(SimTime now) {
  if (lifetime_ <= SimTime::zero() || now < current_.expires_at()) return false;
  rotate(now);
  return true;
}

PacketMeta make_packet(SenderState& sender, const SecurityProfile& profile, PayloadClass payload,
                       double position_m, int heading, bool braking, SimTime now) {
  PacketMeta p;
  if (sender.wallet.refresh(now)) sender.schedule.reset();
  p.sender = sender.wallet.current().owner;
  p.pseudonym_id = sender.wallet.current().id;
  if (profile.scheme == Scheme::NoSecurity) {
    p.kind = PacketKind::Plain;
  } else {
    p.kind = next_kind(sender.schedule, profile.alpha, profile.beta);
    ++(p.kind == PacketKind::Long ? sender.longs_emitted : sender.shorts_emitted);
  }
  p.size_bytes = profile.packet_size(p.kind);
  p.seq = sender.next_seq++;
  p.payload = payload;
  p.sender_position_m = position_m;
  p.sender_heading = heading;
  p.sender_braking = braking;
  p.timestamp = now;
  return p;
}

ReceiveOutcome preview_decision(const PacketMeta& packet, const ValidationCache& cache,
                                const SecurityProfile& profile) {
  if (profile.scheme == Scheme::NoSecurity || packet.kind == PacketKind::Plain) {
    return {Decision::ProcessPlain, 0.0};
  }
  const double short_verify = profile.costs.short_msg.verify_ms;
  if (packet.kind == PacketKind::Long) {
    if (!cache.contains(packet.pseudonym_id)) {
      double cost = profile.costs.cost(profile.scheme, PacketKind::Long).verify_ms;
      if (profile.long_cost == LongCostModel::CertificatePlusSignature) cost += short_verify;
      return {Decision::ValidateLongAndProcess, cost};
    }
    return {Decision::SkipCachedLong, short_verify};
  }
  if (cache.contains(packet.pseudonym_id)) return {Decision::ProcessShort, short_verify};
  return {Decision::DropUnvalidatedShort, 0.0};
}

ReceiveOutcome receiver_decide(const PacketMeta& packet, ValidationCache& cache,
                               const SecurityProfile& profile) {
  const ReceiveOutcome out = preview_decision(packet, cache, profile);
  if (out.decision == Decision::ValidateLongAndProcess) cache.insert(packet.pseudonym_id);
  return out;
}

bool slot_feasibility(std::span<const double> costs_ms, double gamma_hz) {
  const double total = std::accumulate(costs_ms.begin(), costs_ms.end(), 0.0);
  return total < 1000.0 / gamma_hz;
}

double max_packets_per_slot(double verify_ms, double gamma_hz) {
  return (1000.0 / gamma_hz) / verify_ms;
}

bool SlotBudget::admit(std::int64_t slot, double cost_ms) {
  if (slot != slot_) {
    slot_ = slot;
    busy_ms_ = 0.0;
  }
  if (budget_ms_ && busy_ms_ + cost_ms > *budget_ms_) return false;
  busy_ms_ += cost_ms;
  return true;
}

}  // namespace vcsim

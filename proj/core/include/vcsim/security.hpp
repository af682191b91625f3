#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_set>

#include "vcsim/time.hpp"

namespace vcsim {

using VehicleId = std::uint32_t;

enum class Scheme { NoSecurity, BP, Hybrid };
enum class PacketKind { Long, Short, Plain };
enum class PayloadClass { Beacon, Warning };

std::string_view to_string(Scheme scheme);
std::string_view to_string(PacketKind kind);
std::optional<Scheme> parse_scheme(std::string_view text);

/// Per-message cryptographic cost of one packet kind.
struct CryptoCost {
  double sign_ms = 0.0;
  double verify_ms = 0.0;
  int overhead_bytes = 0;
};

/// Sign/verify times and on-air overhead per (scheme, kind). SHORT costs are
/// shared by BP and Hybrid since both carry the same pseudonym signature.
struct CostTable {
  CryptoCost bp_long{1.3, 7.2, 141};
  CryptoCost hybrid_long{54.2, 52.3, 302};
  CryptoCost short_msg{0.5, 3.0, 48};

  CryptoCost cost(Scheme scheme, PacketKind kind) const;
};

/// How a first-seen LONG is charged at the verifier: certificate check plus
/// the message signature (default), or the certificate figure alone.
enum class LongCostModel { CertificatePlusSignature, CertificateOnly };

struct SecurityProfile {
  Scheme scheme = Scheme::NoSecurity;
  int alpha = 1;
  int beta = 0;
  SimTime pseudonym_lifetime = from_seconds(60.0);
  int payload_bytes = 200;
  CostTable costs{};
  LongCostModel long_cost = LongCostModel::CertificatePlusSignature;

  int packet_size(PacketKind kind) const {
    return payload_bytes + costs.cost(scheme, kind).overhead_bytes;
  }
};

struct Pseudonym {
  std::uint64_t id = 0;
  VehicleId owner = 0;
  SimTime activated_at{};
  SimTime lifetime{};

  SimTime expires_at() const { return activated_at + lifetime; }
  bool active_at(SimTime t) const { return t >= activated_at && t < expires_at(); }
};

/// Counters driving LONG/SHORT selection for the active pseudonym.
struct SenderSchedule {
  std::uint32_t messages_since_pseudonym_change = 0;
  // Empty until the first LONG under the current pseudonym.
  std::optional<std::uint32_t> messages_since_last_long;

  void reset() { *this = SenderSchedule{}; }
};

/// Kind of the next emitted message: β pushed LONGs after a pseudonym change,
/// then one LONG followed by α-1 SHORTs, repeating.
PacketKind next_kind(SenderSchedule& schedule, int alpha, int beta);

/// Mean on-air size in steady state (no pushes), exact and rounded.
double mean_packet_size(const SecurityProfile& profile);
int avg_packet_size(const SecurityProfile& profile);

/// Owns a vehicle's pseudonym sequence. Changes happen at phase + k·τ so a
/// fleet with uniform phases never rotates in lockstep.
class PseudonymWallet {
 public:
  PseudonymWallet() = default;
  PseudonymWallet(VehicleId owner, SimTime phase, SimTime lifetime);

  const Pseudonym& current() const { return current_; }
  SimTime phase() const { return phase_; }
  std::uint32_t rotations() const { return serial_; }

  /// Discards the current pseudonym and activates a fresh one at the latest
  /// change instant not after `now`. Precondition: current has expired.
  const Pseudonym& rotate(SimTime now);

  /// Rotates if the current pseudonym has expired; true when it did. A
  /// default-constructed wallet has no lifetime and never rotates.
  bool refresh(SimTime now);

 private:
  SimTime change_instant_at_or_before(SimTime now) const;

  VehicleId owner_ = 0;
  SimTime phase_{};
  SimTime lifetime_{};
  std::uint32_t serial_ = 0;
  Pseudonym current_{};
};

/// Sender-side security state: pseudonyms plus the LONG/SHORT counters,
/// which reset on every pseudonym change.
struct SenderState {
  PseudonymWallet wallet;
  SenderSchedule schedule;
  std::uint64_t next_seq = 0;
  std::uint64_t longs_emitted = 0;
  std::uint64_t shorts_emitted = 0;
};

/// One transmitted frame's upper-layer view.
struct PacketMeta {
  VehicleId sender = 0;
  std::uint64_t pseudonym_id = 0;
  PacketKind kind = PacketKind::Plain;
  int size_bytes = 0;
  std::uint64_t seq = 0;
  PayloadClass payload = PayloadClass::Beacon;
  double sender_position_m = 0.0;  // longitudinal, along sender heading
  int sender_heading = 1;
  bool sender_braking = false;
  SimTime timestamp{};
};

/// Stamps a new message: rotates the pseudonym if due, picks the kind and
/// sizes the packet.
PacketMeta make_packet(SenderState& sender, const SecurityProfile& profile, PayloadClass payload,
                       double position_m, int heading, bool braking, SimTime now);

/// Pseudonyms whose certificate a receiver has already checked.
class ValidationCache {
 public:
  bool contains(std::uint64_t pseudonym_id) const { return validated_.count(pseudonym_id) != 0; }
  /// False if the pseudonym was already present.
  bool insert(std::uint64_t pseudonym_id) { return validated_.insert(pseudonym_id).second; }
  std::size_t size() const { return validated_.size(); }

 private:
  std::unordered_set<std::uint64_t> validated_;
};

enum class Decision {
  ValidateLongAndProcess,
  SkipCachedLong,
  ProcessShort,
  DropUnvalidatedShort,
  ProcessPlain,
};

std::string_view to_string(Decision decision);

struct ReceiveOutcome {
  Decision decision = Decision::ProcessPlain;
  double cost_ms = 0.0;

  bool delivers() const { return decision != Decision::DropUnvalidatedShort; }
};

/// What receiver_decide would do, without touching the cache.
ReceiveOutcome preview_decision(const PacketMeta& packet, const ValidationCache& cache,
                                const SecurityProfile& profile);

/// Verifier-side handling of one relevant, successfully received packet.
/// Inserts newly validated pseudonyms into `cache`.
ReceiveOutcome receiver_decide(const PacketMeta& packet, ValidationCache& cache,
                               const SecurityProfile& profile);

/// True iff the summed processing time fits strictly inside one beacon slot.
bool slot_feasibility(std::span<const double> costs_ms, double gamma_hz);

/// Packets of a single verify cost that fit in one slot.
double max_packets_per_slot(double verify_ms, double gamma_hz);

/// Per-receiver CPU admission when a finite per-slot budget is configured.
/// Messages are admitted in arrival order until the next would exceed it.
class SlotBudget {
 public:
  explicit SlotBudget(std::optional<double> budget_ms = std::nullopt) : budget_ms_(budget_ms) {}

  bool admit(std::int64_t slot, double cost_ms);
  double busy_ms() const { return busy_ms_; }
  std::int64_t slot() const { return slot_; }

 private:
  std::optional<double> budget_ms_;
  std::int64_t slot_ = -1;
  double busy_ms_ = 0.0;
};

}  // namespace vcsim

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcsim/config.hpp"
#include "vcsim/mac.hpp"
#include "vcsim/metrics.hpp"
#include "vcsim/security.hpp"
#include "vcsim/time.hpp"

namespace vcsim {

/// A run-time check on the model failed; the message names the invariant.
class InvariantViolation : public std::logic_error {
 public:
  InvariantViolation(const std::string& invariant, const std::string& detail)
      : std::logic_error(invariant + ": " + detail), invariant_(invariant) {}
  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

/// A relevant frame that cleared the channel at a platoon receiver.
struct DeliveryRecord {
  VehicleId receiver = 0;
  PacketMeta packet{};
  Decision decision = Decision::ProcessPlain;
  bool admitted = true;   // within the per-slot processing budget
  bool delivered = false; // handed to the application
  SimTime time{};
};

struct SimulationHooks {
  std::function<void(const DeliveryRecord&)> on_delivery;
  /// Return true to drop a frame at a receiver regardless of the channel.
  std::function<bool(const PacketMeta&, VehicleId receiver)> force_loss;
  /// Hand SHORTs from unvalidated pseudonyms to the application anyway.
  bool deliver_unvalidated_shorts = false;
};

struct ReplicationResult {
  std::uint64_t seed = 0;
  std::size_t vehicles = 0;
  double ring_length_m = 0.0;
  double tx_power_dbm = 0.0;

  PdrHistogram pdr;
  std::vector<VehicleId> measured_receivers;
  std::vector<ProcessingLedger> ledgers;  // one per measured receiver
  std::vector<KindStats> processing;      // merged over measured receivers

  CrashReport crashes;

  MacCounters mac;
  std::uint64_t reception_checks = 0;
  std::uint64_t receptions_ok = 0;
  std::uint64_t long_validations = 0;
  std::uint64_t events = 0;
  SimTime end_time{};
};

/// Runs one replication to completion. Every random draw is keyed by
/// `seed`, so the result is a pure function of (config, seed, hooks).
ReplicationResult run_replication(const ExperimentConfig& config, std::uint64_t seed,
                                  const SimulationHooks& hooks = {});

}  // namespace vcsim

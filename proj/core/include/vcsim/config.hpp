#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vcsim/radio.hpp"
#include "vcsim/security.hpp"

namespace vcsim {

enum class GapModel { Exponential, Uniform };
enum class MeasurementReceivers { MidPlatoon, AllPlatoon };

struct ExperimentConfig {
  int lanes = 0;  // required
  double mean_spacing_m = 20.0;
  double mean_speed_mps = 22.22;
  double speed_sigma_mps = 2.0;
  Scheme scheme = Scheme::NoSecurity;
  int alpha = 1;
  int beta = 0;
  double tau_s = 60.0;
  double gamma_hz = 10.0;
  int payload_bytes = 200;
  double nominal_range_m = 200.0;
  double warmup_s = 60.0;
  double decel_mps2 = 4.0;
  double reaction_min_s = 0.75;
  double reaction_max_s = 1.5;
  double brake_light_visibility_m = 20.0;
  double vehicle_length_m = 4.0;
  int platoon_size = 100;
  GapModel platoon_gap_model = GapModel::Uniform;
  std::uint64_t seed = 1;
  int replications = 1;
  std::optional<double> processing_budget_ms_per_slot;  // empty: unlimited

  // Run shape.
  bool emergency = true;     // false: steady-state beaconing only
  bool v2v = true;           // false: no radio at all (brake lights only)
  std::optional<double> trigger_s;  // default: warmup_s
  double steady_duration_s = 120.0;
  double max_after_trigger_s = 300.0;
  double mobility_dt_ms = 10.0;

  // Measurement.
  MeasurementReceivers measurement_receivers = MeasurementReceivers::MidPlatoon;
  double pdr_max_m = 600.0;
  int pdr_probe_stride = 10;  // every n-th platoon member records PDR
  bool full_reception = false;  // evaluate receptions at background vehicles too

  LongCostModel long_cost = LongCostModel::CertificatePlusSignature;
  CostTable costs{};
  RadioParams radio{};

  double trigger_time_s() const { return trigger_s.value_or(warmup_s); }
  double slot_ms() const { return 1000.0 / gamma_hz; }
  SecurityProfile security_profile() const;
};

enum class ConfigErrorKind { Syntax, MalformedKey, MissingRequiredKey, OutOfRange, InconsistentPair };

std::string_view to_string(ConfigErrorKind kind);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrorKind kind, std::string key, const std::string& detail);

  ConfigErrorKind kind() const { return kind_; }
  const std::string& key() const { return key_; }

 private:
  ConfigErrorKind kind_;
  std::string key_;
};

/// Ordered key/value assignments as written by the user.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Splits a `key = value` document; `#` starts a comment.
ConfigEntries parse_entries(std::string_view text);

/// Applies entries on top of defaults and checks every invariant.
ExperimentConfig build_config(const ConfigEntries& entries);

ExperimentConfig parse_config(std::string_view text);

/// Throws ConfigError if any invariant does not hold.
void validate(const ExperimentConfig& config);

/// Every known key with its resolved value, in a stable order.
std::vector<std::pair<std::string, std::string>> resolved_entries(const ExperimentConfig& config);

std::vector<std::string> known_keys();

}  // namespace vcsim

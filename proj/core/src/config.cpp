#include "vcsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

namespace vcsim {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw ConfigError(ConfigErrorKind::Syntax, key, "value '" + value + "' is not " + what);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "a number");
  return out;
}

long long to_int(const std::string& key, const std::string& value) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return out;
}

std::uint64_t to_uint64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    bad_value(key, value, "an unsigned 64-bit integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "a boolean");
}

struct KeySpec {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
KeySpec double_key(std::string name, T ExperimentConfig::*field) {
  return {std::move(name),
          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*field = to_double(k, v);
          },
          [field](const ExperimentConfig& c) { return format_double(c.*field); }};
}

KeySpec int_key(std::string name, int ExperimentConfig::*field) {
  return {std::move(name),
          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const auto x = to_int(k, v);
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
              throw ConfigError(ConfigErrorKind::OutOfRange, k, "value " + v + " overflows int");
            }
            c.*field = static_cast<int>(x);
          },
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

KeySpec bool_key(std::string name, bool ExperimentConfig::*field) {
  return {std::move(name),
          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*field = to_bool(k, v);
          },
          [field](const ExperimentConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

KeySpec radio_double(std::string name, double RadioParams::*field) {
  return {std::move(name),
          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.radio.*field = to_double(k, v);
          },
          [field](const ExperimentConfig& c) { return format_double(c.radio.*field); }};
}

KeySpec cost_key(std::string name, CryptoCost CostTable::*row, double CryptoCost::*field) {
  return {std::move(name),
          [row, field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            (c.costs.*row).*field = to_double(k, v);
          },
          [row, field](const ExperimentConfig& c) { return format_double((c.costs.*row).*field); }};
}

KeySpec cost_bytes_key(std::string name, CryptoCost CostTable::*row) {
  return {std::move(name),
          [row](ExperimentConfig& c, const std::string& k, const std::string& v) {
            (c.costs.*row).overhead_bytes = static_cast<int>(to_int(k, v));
          },
          [row](const ExperimentConfig& c) { return std::to_string((c.costs.*row).overhead_bytes); }};
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    using C = ExperimentConfig;
    std::vector<KeySpec> t;
    t.push_back(int_key("lanes", &C::lanes));
    t.push_back(double_key("mean_spacing_m", &C::mean_spacing_m));
    t.push_back(double_key("mean_speed_mps", &C::mean_speed_mps));
    t.push_back(double_key("speed_sigma_mps", &C::speed_sigma_mps));
    t.push_back({"scheme",
                 [](C& c, const std::string& k, const std::string& v) {
                   auto s = parse_scheme(v);
                   if (!s) bad_value(k, v, "one of NoSecurity, BP, Hybrid");
                   c.scheme = *s;
                 },
                 [](const C& c) { return std::string(to_string(c.scheme)); }});
    t.push_back(int_key("alpha", &C::alpha));
    t.push_back(int_key("beta", &C::beta));
    t.push_back(double_key("tau_s", &C::tau_s));
    t.push_back(double_key("gamma_hz", &C::gamma_hz));
    t.push_back(int_key("payload_bytes", &C::payload_bytes));
    t.push_back(double_key("nominal_range_m", &C::nominal_range_m));
    t.push_back(double_key("warmup_s", &C::warmup_s));
    t.push_back(double_key("decel_mps2", &C::decel_mps2));
    t.push_back(double_key("reaction_min_s", &C::reaction_min_s));
    t.push_back(double_key("reaction_max_s", &C::reaction_max_s));
    t.push_back(double_key("brake_light_visibility_m", &C::brake_light_visibility_m));
    t.push_back(double_key("vehicle_length_m", &C::vehicle_length_m));
    t.push_back(int_key("platoon_size", &C::platoon_size));
    t.push_back({"platoon_gap_model",
                 [](C& c, const std::string& k, const std::string& v) {
                   if (v == "uniform") c.platoon_gap_model = GapModel::Uniform;
                   else if (v == "exponential") c.platoon_gap_model = GapModel::Exponential;
                   else bad_value(k, v, "uniform or exponential");
                 },
                 [](const C& c) {
                   return std::string(c.platoon_gap_model == GapModel::Uniform ? "uniform"
                                                                               : "exponential");
                 }});
    t.push_back({"seed",
                 [](C& c, const std::string& k, const std::string& v) { c.seed = to_uint64(k, v); },
                 [](const C& c) { return std::to_string(c.seed); }});
    t.push_back(int_key("replications", &C::replications));
    t.push_back({"processing_budget_ms_per_slot",
                 [](C& c, const std::string& k, const std::string& v) {
                   if (v == "unlimited") c.processing_budget_ms_per_slot.reset();
                   else c.processing_budget_ms_per_slot = to_double(k, v);
                 },
                 [](const C& c) {
                   return c.processing_budget_ms_per_slot
                              ? format_double(*c.processing_budget_ms_per_slot)
                              : std::string("unlimited");
                 }});
    t.push_back(bool_key("emergency", &C::emergency));
    t.push_back(bool_key("v2v", &C::v2v));
    t.push_back({"trigger_s",
                 [](C& c, const std::string& k, const std::string& v) {
                   c.trigger_s = to_double(k, v);
                 },
                 [](const C& c) { return format_double(c.trigger_time_s()); }});
    t.push_back(double_key("steady_duration_s", &C::steady_duration_s));
    t.push_back(double_key("max_after_trigger_s", &C::max_after_trigger_s));
    t.push_back(double_key("mobility_dt_ms", &C::mobility_dt_ms));
    t.push_back({"metrics.receivers",
                 [](C& c, const std::string& k, const std::string& v) {
                   if (v == "mid_platoon") c.measurement_receivers = MeasurementReceivers::MidPlatoon;
                   else if (v == "all_platoon") c.measurement_receivers = MeasurementReceivers::AllPlatoon;
                   else bad_value(k, v, "mid_platoon or all_platoon");
                 },
                 [](const C& c) {
                   return std::string(c.measurement_receivers == MeasurementReceivers::MidPlatoon
                                          ? "mid_platoon"
                                          : "all_platoon");
                 }});
    t.push_back(double_key("metrics.pdr_max_m", &C::pdr_max_m));
    t.push_back(int_key("metrics.pdr_probe_stride", &C::pdr_probe_stride));
    t.push_back(bool_key("sim.full_reception", &C::full_reception));
    t.push_back({"security.long_cost",
                 [](C& c, const std::string& k, const std::string& v) {
                   if (v == "cert_plus_sig") c.long_cost = LongCostModel::CertificatePlusSignature;
                   else if (v == "cert_only") c.long_cost = LongCostModel::CertificateOnly;
                   else bad_value(k, v, "cert_plus_sig or cert_only");
                 },
                 [](const C& c) {
                   return std::string(c.long_cost == LongCostModel::CertificatePlusSignature
                                          ? "cert_plus_sig"
                                          : "cert_only");
                 }});
    const std::pair<const char*, CryptoCost CostTable::*> rows[] = {
        {"cost.bp_long", &CostTable::bp_long},
        {"cost.hybrid_long", &CostTable::hybrid_long},
        {"cost.short", &CostTable::short_msg},
    };
    for (const auto& [prefix, row] : rows) {
      t.push_back(cost_key(std::string(prefix) + ".sign_ms", row, &CryptoCost::sign_ms));
      t.push_back(cost_key(std::string(prefix) + ".verify_ms", row, &CryptoCost::verify_ms));
      t.push_back(cost_bytes_key(std::string(prefix) + ".overhead_bytes", row));
    }
    t.push_back(radio_double("radio.bitrate_mbps", &RadioParams::bitrate_mbps));
    t.push_back(radio_double("radio.preamble_us", &RadioParams::preamble_us));
    t.push_back(radio_double("radio.slot_time_us", &RadioParams::slot_time_us));
    t.push_back(radio_double("radio.aifs_us", &RadioParams::aifs_us));
    t.push_back({"radio.cw_min",
                 [](C& c, const std::string& k, const std::string& v) {
                   c.radio.cw_min = static_cast<int>(to_int(k, v));
                 },
                 [](const C& c) { return std::to_string(c.radio.cw_min); }});
    t.push_back({"radio.tx_power_dbm",
                 [](C& c, const std::string& k, const std::string& v) {
                   if (v == "calibrated") c.radio.tx_power_dbm.reset();
                   else c.radio.tx_power_dbm = to_double(k, v);
                 },
                 [](const C& c) {
                   return c.radio.tx_power_dbm ? format_double(*c.radio.tx_power_dbm)
                                               : std::string("calibrated");
                 }});
    t.push_back(radio_double("radio.path_loss_exponent", &RadioParams::path_loss_exponent));
    t.push_back(radio_double("radio.reference_loss_db", &RadioParams::reference_loss_db));
    t.push_back(radio_double("radio.nakagami_m_near", &RadioParams::nakagami_m_near));
    t.push_back(radio_double("radio.nakagami_m_mid", &RadioParams::nakagami_m_mid));
    t.push_back(radio_double("radio.nakagami_m_far", &RadioParams::nakagami_m_far));
    t.push_back(radio_double("radio.nakagami_near_m", &RadioParams::nakagami_near_m));
    t.push_back(radio_double("radio.nakagami_far_m", &RadioParams::nakagami_far_m));
    t.push_back(radio_double("radio.noise_floor_dbm", &RadioParams::noise_floor_dbm));
    t.push_back(radio_double("radio.sinr_threshold_db", &RadioParams::sinr_threshold_db));
    t.push_back(radio_double("radio.carrier_sense_dbm", &RadioParams::carrier_sense_dbm));
    t.push_back({"radio.mac_header_bytes",
                 [](C& c, const std::string& k, const std::string& v) {
                   c.radio.mac_header_bytes = static_cast<int>(to_int(k, v));
                 },
                 [](const C& c) { return std::to_string(c.radio.mac_header_bytes); }});
    t.push_back(radio_double("radio.lane_width_m", &RadioParams::lane_width_m));
    t.push_back({"radio.calibration",
                 [](C& c, const std::string& k, const std::string& v) {
                   if (v == "median") c.radio.calibration = Calibration::Median;
                   else if (v == "mean") c.radio.calibration = Calibration::Mean;
                   else bad_value(k, v, "median or mean");
                 },
                 [](const C& c) {
                   return std::string(c.radio.calibration == Calibration::Median ? "median" : "mean");
                 }});
    return t;
  }();
  return table;
}

[[noreturn]] void out_of_range(const std::string& key, const std::string& bound) {
  throw ConfigError(ConfigErrorKind::OutOfRange, key, "must be " + bound);
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) out_of_range(key, "> 0");
}

void require_non_negative(const std::string& key, double v) {
  if (!(v >= 0.0)) out_of_range(key, ">= 0");
}

}  // namespace

std::string_view to_string(ConfigErrorKind kind) {
  switch (kind) {
    case ConfigErrorKind::Syntax: return "Syntax";
    case ConfigErrorKind::MalformedKey: return "MalformedKey";
    case ConfigErrorKind::MissingRequiredKey: return "MissingRequiredKey";
    case ConfigErrorKind::OutOfRange: return "OutOfRange";
    case ConfigErrorKind::InconsistentPair: return "InconsistentPair";
  }
  return "?";
}

ConfigError::ConfigError(ConfigErrorKind kind, std::string key, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + "(" + key + "): " + detail),
      kind_(kind),
      key_(std::move(key)) {}

SecurityProfile ExperimentConfig::security_profile() const {
  SecurityProfile p;
  p.scheme = scheme;
  p.alpha = alpha;
  p.beta = beta;
  p.pseudonym_lifetime = from_seconds(tau_s);
  p.payload_bytes = payload_bytes;
  p.costs = costs;
  p.long_cost = long_cost;
  return p;
}

ConfigEntries parse_entries(std::string_view text) {
  ConfigEntries out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(ConfigErrorKind::Syntax, "line " + std::to_string(line_no),
                        "expected 'key = value', got '" + stripped + "'");
    }
    std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(ConfigErrorKind::MalformedKey, "line " + std::to_string(line_no),
                        "empty key");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  if (c.lanes == 0) {
    throw ConfigError(ConfigErrorKind::MissingRequiredKey, "lanes", "required, one of {4, 8}");
  }
  if (c.lanes != 4 && c.lanes != 8) out_of_range("lanes", "4 or 8");
  require_positive("mean_spacing_m", c.mean_spacing_m);
  require_positive("mean_speed_mps", c.mean_speed_mps);
  require_non_negative("speed_sigma_mps", c.speed_sigma_mps);
  if (c.speed_sigma_mps * 3.0 >= c.mean_speed_mps) {
    throw ConfigError(ConfigErrorKind::InconsistentPair, "speed_sigma_mps",
                      "mean_speed_mps - 3*speed_sigma_mps must stay positive");
  }
  if (c.alpha < 1) out_of_range("alpha", ">= 1");
  if (c.beta < 0) out_of_range("beta", ">= 0");
  require_positive("tau_s", c.tau_s);
  require_positive("gamma_hz", c.gamma_hz);
  if (c.tau_s * c.gamma_hz < c.alpha) {
    throw ConfigError(ConfigErrorKind::InconsistentPair, "alpha",
                      "tau_s * gamma_hz must be >= alpha");
  }
  if (c.payload_bytes <= 0) out_of_range("payload_bytes", "> 0");
  require_positive("nominal_range_m", c.nominal_range_m);
  require_positive("warmup_s", c.warmup_s);
  require_positive("decel_mps2", c.decel_mps2);
  require_positive("reaction_min_s", c.reaction_min_s);
  require_positive("reaction_max_s", c.reaction_max_s);
  if (c.reaction_min_s > c.reaction_max_s) {
    throw ConfigError(ConfigErrorKind::InconsistentPair, "reaction_min_s",
                      "reaction_min_s must not exceed reaction_max_s");
  }
  require_positive("brake_light_visibility_m", c.brake_light_visibility_m);
  require_positive("vehicle_length_m", c.vehicle_length_m);
  if (c.mean_spacing_m <= c.vehicle_length_m + 1.0) {
    throw ConfigError(ConfigErrorKind::InconsistentPair, "mean_spacing_m",
                      "must exceed vehicle_length_m + 1");
  }
  if (c.platoon_gap_model == GapModel::Uniform && c.mean_spacing_m / 2.0 < c.vehicle_length_m + 1.0) {
    throw ConfigError(ConfigErrorKind::InconsistentPair, "platoon_gap_model",
                      "uniform gaps need mean_spacing_m / 2 >= vehicle_length_m + 1");
  }
  if (c.platoon_size < 1) out_of_range("platoon_size", ">= 1");
  if (c.replications < 1) out_of_range("replications", ">= 1");
  if (c.processing_budget_ms_per_slot) {
    require_positive("processing_budget_ms_per_slot", *c.processing_budget_ms_per_slot);
    if (*c.processing_budget_ms_per_slot > c.slot_ms()) {
      out_of_range("processing_budget_ms_per_slot", "<= slot duration (1000 / gamma_hz ms)");
    }
  }
  if (c.trigger_s && *c.trigger_s < c.warmup_s) {
    throw ConfigError(ConfigErrorKind::InconsistentPair, "trigger_s", "must be >= warmup_s");
  }
  require_positive("steady_duration_s", c.steady_duration_s);
  require_positive("max_after_trigger_s", c.max_after_trigger_s);
  require_positive("mobility_dt_ms", c.mobility_dt_ms);
  require_positive("metrics.pdr_max_m", c.pdr_max_m);
  if (c.pdr_probe_stride < 1) out_of_range("metrics.pdr_probe_stride", ">= 1");

  const std::pair<const char*, const CryptoCost*> rows[] = {
      {"cost.bp_long", &c.costs.bp_long},
      {"cost.hybrid_long", &c.costs.hybrid_long},
      {"cost.short", &c.costs.short_msg},
  };
  for (const auto& [prefix, row] : rows) {
    require_non_negative(std::string(prefix) + ".sign_ms", row->sign_ms);
    require_non_negative(std::string(prefix) + ".verify_ms", row->verify_ms);
    require_non_negative(std::string(prefix) + ".overhead_bytes", row->overhead_bytes);
  }

  const RadioParams& r = c.radio;
  require_positive("radio.bitrate_mbps", r.bitrate_mbps);
  require_non_negative("radio.preamble_us", r.preamble_us);
  require_positive("radio.slot_time_us", r.slot_time_us);
  require_non_negative("radio.aifs_us", r.aifs_us);
  require_non_negative("radio.cw_min", r.cw_min);
  require_positive("radio.path_loss_exponent", r.path_loss_exponent);
  require_positive("radio.nakagami_m_near", r.nakagami_m_near);
  require_positive("radio.nakagami_m_mid", r.nakagami_m_mid);
  require_positive("radio.nakagami_m_far", r.nakagami_m_far);
  require_positive("radio.nakagami_near_m", r.nakagami_near_m);
  if (r.nakagami_far_m < r.nakagami_near_m) {
    throw ConfigError(ConfigErrorKind::InconsistentPair, "radio.nakagami_far_m",
                      "must be >= radio.nakagami_near_m");
  }
  require_non_negative("radio.mac_header_bytes", r.mac_header_bytes);
  require_positive("radio.lane_width_m", r.lane_width_m);
}

ExperimentConfig build_config(const ConfigEntries& entries) {
  ExperimentConfig config;
  const auto& table = key_table();
  for (const auto& [key, value] : entries) {
    auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec& s) { return s.name == key; });
    if (it == table.end()) {
      throw ConfigError(ConfigErrorKind::MalformedKey, key, "unknown key");
    }
    it->set(config, key, value);
  }
  validate(config);
  return config;
}

ExperimentConfig parse_config(std::string_view text) { return build_config(parse_entries(text)); }

std::vector<std::pair<std::string, std::string>> resolved_entries(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : key_table()) out.emplace_back(spec.name, spec.get(config));
  return out;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& spec : key_table()) out.push_back(spec.name);
  return out;
}

}  // namespace vcsim

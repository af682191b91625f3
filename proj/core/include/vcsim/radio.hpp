#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "vcsim/rng.hpp"
#include "vcsim/time.hpp"

namespace vcsim {

/// Which point of the isolated-link SNR distribution sits exactly on the
/// SINR threshold at the nominal range.
enum class Calibration { Median, Mean };

/// 802.11p-style broadcast link and propagation constants.
struct RadioParams {
  double bitrate_mbps = 6.0;
  double preamble_us = 40.0;
  double slot_time_us = 13.0;
  double aifs_us = 58.0;
  int cw_min = 15;
  std::optional<double> tx_power_dbm;  // empty: calibrated from nominal range
  double path_loss_exponent = 2.0;
  double reference_loss_db = 47.86;  // free space at 1 m, 5.9 GHz
  double nakagami_m_near = 3.0;
  double nakagami_m_mid = 1.5;
  double nakagami_m_far = 1.0;
  double nakagami_near_m = 50.0;
  double nakagami_far_m = 150.0;
  double noise_floor_dbm = -99.0;
  double sinr_threshold_db = 10.0;
  double carrier_sense_dbm = -96.0;
  int mac_header_bytes = 36;
  double lane_width_m = 3.5;
  Calibration calibration = Calibration::Median;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Preamble plus serialized MAC frame: preamble + 8·(size + header)/rate µs.
double airtime_us(int size_bytes, const RadioParams& params);
SimTime airtime(int size_bytes, const RadioParams& params);

struct RxPower {
  double dbm = 0.0;
  bool degenerate_distance = false;  // distance below the 1 m reference, clamped
};

/// Log-distance mean received power.
RxPower mean_rx_power(double tx_power_dbm, double distance_m, const RadioParams& params);

/// Nakagami shape parameter for a link of the given length.
double nakagami_m(double distance_m, const RadioParams& params);

/// Median of the unit-mean Gamma(m, 1/m) power multiplier.
double fading_median(double m);

/// Transmit power placing the calibrated SNR point at `nominal_range_m`.
double calibrate_tx_power(const RadioParams& params, double nominal_range_m);

/// Transmit power actually used: explicit override or calibration.
double effective_tx_power(const RadioParams& params, double nominal_range_m);

/// Unit-mean Nakagami-m power multiplier (Gamma with shape m, scale 1/m).
/// An infinite shape means no fading.
double fading_sample(double m, CounterRng& rng);
double fading_sample(double distance_m, CounterRng& rng, const RadioParams& params);

/// Precomputed link-budget arithmetic for the hot path (linear mW).
class LinkBudget {
 public:
  LinkBudget(const RadioParams& params, double tx_power_dbm);

  double mean_rx_mw(double distance_m) const;
  double noise_mw() const { return noise_mw_; }
  double sinr_threshold() const { return sinr_threshold_; }
  double carrier_sense_mw() const { return carrier_sense_mw_; }
  double tx_power_dbm() const { return tx_power_dbm_; }

 private:
  double tx_power_dbm_;
  double gain_at_1m_mw_;
  double exponent_;
  double noise_mw_;
  double sinr_threshold_;
  double carrier_sense_mw_;
};

/// A frame overlapping the one being received, with its (faded) power at
/// the receiver.
struct Interferer {
  SimTime start{};
  SimTime end{};
  double power_mw = 0.0;
};

/// Largest summed interference power over any instant of [start, end).
double peak_interference_mw(SimTime start, SimTime end, std::span<const Interferer> interferers);

struct ReceptionInput {
  SimTime start{};
  SimTime end{};
  double signal_mw = 0.0;
  double noise_mw = 0.0;
  double sinr_threshold = 10.0;  // linear
  bool receiver_transmitting = false;
  std::span<const Interferer> interferers{};
};

/// Capture rule: the frame is received iff the receiver stayed silent, the
/// signal clears the noise-limited sensitivity, and SINR stays above the
/// threshold on every overlap interval.
bool reception_decision(const ReceptionInput& in);

}  // namespace vcsim

#include "vcsim/radio.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

namespace vcsim {

double airtime_us(int size_bytes, const RadioParams& params) {
  return params.preamble_us + 8.0 * (size_bytes + params.mac_header_bytes) / params.bitrate_mbps;
}

SimTime airtime(int size_bytes, const RadioParams& params) {
  return from_micros(airtime_us(size_bytes, params));
}

RxPower mean_rx_power(double tx_power_dbm, double distance_m, const RadioParams& params) {
  RxPower out;
  if (!(distance_m >= 1.0)) {
    out.degenerate_distance = true;
    distance_m = 1.0;
  }
  out.dbm = tx_power_dbm - params.reference_loss_db -
            10.0 * params.path_loss_exponent * std::log10(distance_m);
  return out;
}

double nakagami_m(double distance_m, const RadioParams& params) {
  if (distance_m < params.nakagami_near_m) return params.nakagami_m_near;
  if (distance_m < params.nakagami_far_m) return params.nakagami_m_mid;
  return params.nakagami_m_far;
}

double fading_median(double m) {
  if (std::isinf(m)) return 1.0;
  return boost::math::gamma_p_inv(m, 0.5) / m;
}

double calibrate_tx_power(const RadioParams& params, double nominal_range_m) {
  double target_dbm = params.noise_floor_dbm + params.sinr_threshold_db;
  if (params.calibration == Calibration::Median) {
    // Scale the mean so that the median faded SNR hits the threshold.
    target_dbm -= 10.0 * std::log10(fading_median(nakagami_m(nominal_range_m, params)));
  }
  return target_dbm + params.reference_loss_db +
         10.0 * params.path_loss_exponent * std::log10(nominal_range_m);
}

double effective_tx_power(const RadioParams& params, double nominal_range_m) {
  return params.tx_power_dbm ? *params.tx_power_dbm : calibrate_tx_power(params, nominal_range_m);
}

double fading_sample(double m, CounterRng& rng) {
  if (std::isinf(m)) return 1.0;
  if (m == 1.0) {
    std::exponential_distribution<double> exp1(1.0);
    return exp1(rng);
  }
  std::gamma_distribution<double> gamma(m, 1.0 / m);
  return gamma(rng);
}

double fading_sample(double distance_m, CounterRng& rng, const RadioParams& params) {
  return fading_sample(nakagami_m(distance_m, params), rng);
}

LinkBudget::LinkBudget(const RadioParams& params, double tx_power_dbm)
    : tx_power_dbm_(tx_power_dbm),
      gain_at_1m_mw_(dbm_to_mw(tx_power_dbm - params.reference_loss_db)),
      exponent_(params.path_loss_exponent),
      noise_mw_(dbm_to_mw(params.noise_floor_dbm)),
      sinr_threshold_(db_to_linear(params.sinr_threshold_db)),
      carrier_sense_mw_(dbm_to_mw(params.carrier_sense_dbm)) {}

double LinkBudget::mean_rx_mw(double distance_m) const {
  const double d = std::max(distance_m, 1.0);
  if (exponent_ == 2.0) return gain_at_1m_mw_ / (d * d);
  return gain_at_1m_mw_ * std::pow(d, -exponent_);
}

double peak_interference_mw(SimTime start, SimTime end, std::span<const Interferer> interferers) {
  // Summed power is piecewise constant and only rises at an interferer's
  // start, so the peak is attained at the frame start or some interferer start.
  double peak = 0.0;
  auto level_at = [&](SimTime t) {
    double sum = 0.0;
    for (const auto& i : interferers) {
      if (i.start <= t && t < i.end) sum += i.power_mw;
    }
    return sum;
  };
  peak = level_at(start);
  for (const auto& i : interferers) {
    if (i.start > start && i.start < end) peak = std::max(peak, level_at(i.start));
  }
  return peak;
}

bool reception_decision(const ReceptionInput& in) {
  if (in.receiver_transmitting) return false;
  if (in.signal_mw < in.sinr_threshold * in.noise_mw) return false;
  double total = 0.0;
  for (const auto& i : in.interferers) total += i.power_mw;
  if (in.signal_mw >= in.sinr_threshold * (in.noise_mw + total)) return true;
  const double peak = peak_interference_mw(in.start, in.end, in.interferers);
  return in.signal_mw >= in.sinr_threshold * (in.noise_mw + peak);
}

}  // namespace vcsim

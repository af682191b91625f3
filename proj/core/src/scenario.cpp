#include "vcsim/scenario.hpp"

#include <algorithm>
#include <random>

#include "vcsim/rng.hpp"

namespace vcsim {

namespace {

constexpr double kRangeMargin = 100.0;

double draw_speed(const ExperimentConfig& c, CounterRng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double z = 0.0;
  do {
    z = normal(rng);
  } while (std::abs(z) > 3.0);
  return c.mean_speed_mps + c.speed_sigma_mps * z;
}

double min_gap(const ExperimentConfig& c) { return c.vehicle_length_m + 1.0; }

double draw_background_gap(const ExperimentConfig& c, CounterRng& rng) {
  std::exponential_distribution<double> exp(1.0 / c.mean_spacing_m);
  return std::max(exp(rng), min_gap(c));
}

double draw_platoon_gap(const ExperimentConfig& c, CounterRng& rng) {
  if (c.platoon_gap_model == GapModel::Exponential) return draw_background_gap(c, rng);
  std::uniform_real_distribution<double> uni(0.5 * c.mean_spacing_m, 1.5 * c.mean_spacing_m);
  return std::max(uni(rng), min_gap(c));
}

}  // namespace

double lane_offset_m(int lane, const RadioParams& radio) { return lane * radio.lane_width_m; }

int lane_heading(int lane, int lanes) { return lane < lanes / 2 ? 1 : -1; }

Scenario build_scenario(const ExperimentConfig& c, std::uint64_t seed) {
  Scenario s;
  s.platoon_lane = 0;
  const double margin = c.nominal_range_m + kRangeMargin;

  // Platoon gaps first: the ring circumference follows the actual extent.
  CounterRng platoon_rng(seed, Stream::Placement, 1000);
  std::vector<double> platoon_gaps;
  double extent = 0.0;
  for (int k = 1; k < c.platoon_size; ++k) {
    platoon_gaps.push_back(draw_platoon_gap(c, platoon_rng));
    extent += platoon_gaps.back();
  }
  s.road_length_m = extent + 2.0 * margin;
  const double length = s.road_length_m;

  CounterRng platoon_speed_rng(seed, Stream::Speed, 1000);
  const double platoon_speed = draw_speed(c, platoon_speed_rng);

  auto add = [&](int lane, double x, double speed, std::optional<int> platoon_index) {
    ScenarioVehicle v;
    v.id = static_cast<VehicleId>(s.vehicles.size());
    v.lane = lane;
    v.heading = lane_heading(lane, c.lanes);
    v.position_m = v.heading * x;
    v.speed_mps = speed;
    v.platoon_member = platoon_index.has_value();
    v.platoon_index = platoon_index;
    s.vehicles.push_back(v);
    return v.id;
  };

  for (int lane = 0; lane < c.lanes; ++lane) {
    CounterRng gap_rng(seed, Stream::Placement, static_cast<std::uint64_t>(lane));
    CounterRng speed_rng(seed, Stream::Speed, static_cast<std::uint64_t>(lane));

    if (lane == s.platoon_lane) {
      // Head V1 sits `margin` short of the ring seam, the tail `margin` past
      // the origin; background traffic fills the rest of the lane at the
      // platoon's speed.
      double x = length - margin;
      s.platoon.push_back(add(lane, x, platoon_speed, 1));
      for (int k = 2; k <= c.platoon_size; ++k) {
        x -= platoon_gaps[static_cast<std::size_t>(k - 2)];
        s.platoon.push_back(add(lane, x, platoon_speed, k));
      }
      const double tail = x;
      double bx = length - margin + draw_background_gap(c, gap_rng);
      while (bx <= tail + length - min_gap(c)) {
        add(lane, bx, platoon_speed, std::nullopt);
        bx += draw_background_gap(c, gap_rng);
      }
      continue;
    }

    std::uniform_real_distribution<double> start(0.0, c.mean_spacing_m);
    const double first = start(gap_rng);
    double x = first;
    while (x <= first + length - min_gap(c)) {
      add(lane, x, draw_speed(c, speed_rng), std::nullopt);
      x += draw_background_gap(c, gap_rng);
    }
  }
  return s;
}

}  // namespace vcsim

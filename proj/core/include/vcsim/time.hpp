#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace vcsim {

// Simulation clock. Integer nanoseconds keep event ordering exact and
// reproducible across platforms.
using SimTime = std::chrono::nanoseconds;

constexpr SimTime from_seconds(double s) {
  return SimTime{static_cast<std::int64_t>(std::llround(s * 1e9))};
}
constexpr SimTime from_millis(double ms) {
  return SimTime{static_cast<std::int64_t>(std::llround(ms * 1e6))};
}
constexpr SimTime from_micros(double us) {
  return SimTime{static_cast<std::int64_t>(std::llround(us * 1e3))};
}
constexpr double to_seconds(SimTime t) { return static_cast<double>(t.count()) * 1e-9; }
constexpr double to_millis(SimTime t) { return static_cast<double>(t.count()) * 1e-6; }

}  // namespace vcsim

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcsim/mobility.hpp"
#include "vcsim/security.hpp"

namespace vcsim {

/// Attempts/successes per distance bin.
class PdrHistogram {
 public:
  explicit PdrHistogram(double bin_m = 10.0) : bin_m_(bin_m) {}

  void record(double distance_m, bool success);
  void add(std::size_t bin, std::uint64_t attempts, std::uint64_t successes);
  void merge(const PdrHistogram& other);

  double bin_m() const { return bin_m_; }
  std::size_t bins() const { return attempts_.size(); }
  std::uint64_t attempts(std::size_t bin) const { return bin < bins() ? attempts_[bin] : 0; }
  std::uint64_t successes(std::size_t bin) const { return bin < bins() ? successes_[bin] : 0; }
  std::uint64_t total_attempts() const;
  std::uint64_t total_successes() const;

 private:
  double bin_m_;
  std::vector<std::uint64_t> attempts_;
  std::vector<std::uint64_t> successes_;
};

struct PdrPoint {
  double bin_start_m = 0.0;
  double bin_center_m = 0.0;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  double pdr = 0.0;
};

/// successes / attempts per bin; empty bins are omitted.
std::vector<PdrPoint> pdr_curve(const PdrHistogram& histogram);

/// Count, sum and sum of squares of integer samples; merging is exact.
struct Moments {
  std::uint64_t n = 0;
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;

  void add(std::uint64_t x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return n ? static_cast<double>(sum) / static_cast<double>(n) : 0.0; }
  /// Population standard deviation.
  double stddev() const;
};

/// One receiver's packet counts within one beacon slot.
struct SlotCounts {
  std::uint32_t received_long = 0;
  std::uint32_t processed_long = 0;       // first LONG of a pseudonym, certificate validated
  std::uint32_t skipped_cached_long = 0;  // LONG of an already validated pseudonym
  std::uint32_t received_short = 0;
  std::uint32_t processed_short = 0;
  std::uint32_t dropped_unvalidated = 0;
  std::uint32_t received_plain = 0;
  std::uint32_t processed_plain = 0;
  std::uint32_t budget_dropped = 0;
  double busy_ms = 0.0;

  std::uint32_t received() const { return received_long + received_short + received_plain; }
  std::uint32_t accounted() const {
    return processed_long + skipped_cached_long + processed_short + dropped_unvalidated +
           processed_plain + budget_dropped;
  }
};

/// Per-slot processing record of one receiver over a slot window.
class ProcessingLedger {
 public:
  ProcessingLedger() = default;
  ProcessingLedger(std::int64_t first_slot, std::int64_t end_slot);

  bool covers(std::int64_t slot) const { return slot >= first_slot_ && slot < end_slot_; }
  /// Records one relevant received packet and what the verifier did with it.
  void record(std::int64_t slot, PacketKind kind, Decision decision, bool admitted, double cost_ms);

  std::int64_t first_slot() const { return first_slot_; }
  std::int64_t end_slot() const { return end_slot_; }
  const std::vector<SlotCounts>& slots() const { return slots_; }
  const SlotCounts& at(std::int64_t slot) const { return slots_[static_cast<std::size_t>(slot - first_slot_)]; }

 private:
  std::int64_t first_slot_ = 0;
  std::int64_t end_slot_ = 0;
  std::vector<SlotCounts> slots_;
};

struct KindStats {
  PacketKind kind = PacketKind::Long;
  Moments received;
  Moments processed;
};

/// Per-slot reception/processing moments for LONG and SHORT (PLAIN under
/// no security). Slots with no traffic count as zeros.
std::vector<KindStats> processing_stats(const ProcessingLedger& ledger, bool plain);

struct CrashReport {
  int platoon_size = 0;
  int crashed = 0;
  bool complete = false;  // every platoon vehicle immobile
  std::vector<CrashEvent> events;
  std::vector<std::optional<double>> warned_s;  // per platoon index - 1
  std::vector<std::optional<double>> crashed_s;
};

class IncompleteRun : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 100 · crashed / platoon size; throws IncompleteRun unless complete.
double crash_fraction(const CrashReport& report);

struct ResultKey {
  std::string scheme;  // NoSecurity, BP, Hybrid, or NoV2V
  int alpha = 1;
  int beta = 0;
  int lanes = 0;
};

struct PdrTable {
  ResultKey key;  // beta is not part of the pdr.csv key
  PdrHistogram histogram;
};

struct ProcessingTable {
  ResultKey key;
  std::vector<KindStats> kinds;
};

struct CrashRow {
  ResultKey key;
  std::uint64_t seed = 0;
  double crashed_pct = 0.0;
};

struct ResultTables {
  std::vector<PdrTable> pdr;
  std::vector<ProcessingTable> processing;
  std::vector<CrashRow> crashes;
};

class IoFailure : public std::runtime_error {
 public:
  IoFailure(const std::filesystem::path& path, const std::string& what);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// %.6g, the numeric format of every CSV cell.
std::string format_number(double value);

/// Writes pdr.csv, processing.csv and crashes.csv; returns their paths.
std::vector<std::filesystem::path> emit_csv(const ResultTables& results,
                                            const std::filesystem::path& out_dir);

}  // namespace vcsim

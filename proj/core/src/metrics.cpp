#include "vcsim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace vcsim {

void PdrHistogram::record(double distance_m, bool success) {
  const auto bin = static_cast<std::size_t>(std::max(0.0, distance_m) / bin_m_);
  add(bin, 1, success ? 1 : 0);
}

void PdrHistogram::add(std::size_t bin, std::uint64_t attempts, std::uint64_t successes) {
  if (bin >= attempts_.size()) {
    attempts_.resize(bin + 1, 0);
    successes_.resize(bin + 1, 0);
  }
  attempts_[bin] += attempts;
  successes_[bin] += successes;
}

void PdrHistogram::merge(const PdrHistogram& other) {
  for (std::size_t b = 0; b < other.bins(); ++b) {
    if (other.attempts_[b]) add(b, other.attempts_[b], other.successes_[b]);
  }
}

std::uint64_t PdrHistogram::total_attempts() const {
  return std::accumulate(attempts_.begin(), attempts_.end(), std::uint64_t{0});
}

std::uint64_t PdrHistogram::total_successes() const {
  return std::accumulate(successes_.begin(), successes_.end(), std::uint64_t{0});
}

std::vector<PdrPoint> pdr_curve(const PdrHistogram& h) {
  std::vector<PdrPoint> out;
  for (std::size_t b = 0; b < h.bins(); ++b) {
    if (h.attempts(b) == 0) continue;
    PdrPoint p;
    p.bin_start_m = static_cast<double>(b) * h.bin_m();
    p.bin_center_m = p.bin_start_m + 0.5 * h.bin_m();
    p.attempts = h.attempts(b);
    p.successes = h.successes(b);
    p.pdr = static_cast<double>(p.successes) / static_cast<double>(p.attempts);
    out.push_back(p);
  }
  return out;
}

double Moments::stddev() const {
  if (n == 0) return 0.0;
  const double m = mean();
  const double var = static_cast<double>(sum_sq) / static_cast<double>(n) - m * m;
  return std::sqrt(std::max(0.0, var));
}

ProcessingLedger::ProcessingLedger(std::int64_t first_slot, std::int64_t end_slot)
    : first_slot_(first_slot),
      end_slot_(std::max(first_slot, end_slot)),
      slots_(static_cast<std::size_t>(end_slot_ - first_slot_)) {}

void ProcessingLedger::record(std::int64_t slot, PacketKind kind, Decision decision, bool admitted,
                              double cost_ms) {
  if (!covers(slot)) return;
  SlotCounts& s = slots_[static_cast<std::size_t>(slot - first_slot_)];
  switch (kind) {
    case PacketKind::Long: ++s.received_long; break;
    case PacketKind::Short: ++s.received_short; break;
    case PacketKind::Plain: ++s.received_plain; break;
  }
  if (!admitted) {
    ++s.budget_dropped;
    return;
  }
  s.busy_ms += cost_ms;
  switch (decision) {
    case Decision::ValidateLongAndProcess: ++s.processed_long; break;
    case Decision::SkipCachedLong: ++s.skipped_cached_long; break;
    case Decision::ProcessShort: ++s.processed_short; break;
    case Decision::DropUnvalidatedShort: ++s.dropped_unvalidated; break;
    case Decision::ProcessPlain: ++s.processed_plain; break;
  }
}

std::vector<KindStats> processing_stats(const ProcessingLedger& ledger, bool plain) {
  if (plain) {
    KindStats k{PacketKind::Plain, {}, {}};
    for (const auto& s : ledger.slots()) {
      k.received.add(s.received_plain);
      k.processed.add(s.processed_plain);
    }
    return {k};
  }
  KindStats l{PacketKind::Long, {}, {}};
  KindStats sh{PacketKind::Short, {}, {}};
  for (const auto& s : ledger.slots()) {
    l.received.add(s.received_long);
    l.processed.add(s.processed_long);
    sh.received.add(s.received_short);
    sh.processed.add(s.processed_short);
  }
  return {l, sh};
}

double crash_fraction(const CrashReport& report) {
  if (!report.complete) {
    throw IncompleteRun("platoon still moving: crash fraction is undefined");
  }
  if (report.platoon_size <= 0) return 0.0;
  return 100.0 * report.crashed / report.platoon_size;
}

IoFailure::IoFailure(const std::filesystem::path& path, const std::string& what)
    : std::runtime_error("IoFailure(" + path.string() + "): " + what), path_(path) {}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure(path, "cannot open for writing");
  return out;
}

void close_csv(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoFailure(path, "write failed");
}

}  // namespace

std::vector<std::filesystem::path> emit_csv(const ResultTables& results,
                                            const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoFailure(out_dir, ec.message());

  const auto pdr_path = out_dir / "pdr.csv";
  const auto proc_path = out_dir / "processing.csv";
  const auto crash_path = out_dir / "crashes.csv";

  {
    auto out = open_csv(pdr_path);
    out << "scheme,alpha,lanes,bin_m,attempts,successes,pdr\n";
    for (const auto& t : results.pdr) {
      for (const auto& p : pdr_curve(t.histogram)) {
        out << t.key.scheme << ',' << t.key.alpha << ',' << t.key.lanes << ','
            << format_number(p.bin_start_m) << ',' << p.attempts << ',' << p.successes << ','
            << format_number(p.pdr) << '\n';
      }
    }
    close_csv(out, pdr_path);
  }
  {
    auto out = open_csv(proc_path);
    out << "scheme,alpha,beta,lanes,kind,mu_r,sigma_r,mu_p,sigma_p\n";
    for (const auto& t : results.processing) {
      for (const auto& k : t.kinds) {
        out << t.key.scheme << ',' << t.key.alpha << ',' << t.key.beta << ',' << t.key.lanes << ','
            << to_string(k.kind) << ',' << format_number(k.received.mean()) << ','
            << format_number(k.received.stddev()) << ',' << format_number(k.processed.mean())
            << ',' << format_number(k.processed.stddev()) << '\n';
      }
    }
    close_csv(out, proc_path);
  }
  {
    auto out = open_csv(crash_path);
    out << "scheme,alpha,beta,lanes,seed,crashed_pct\n";
    for (const auto& r : results.crashes) {
      out << r.key.scheme << ',' << r.key.alpha << ',' << r.key.beta << ',' << r.key.lanes << ','
          << r.seed << ',' << format_number(r.crashed_pct) << '\n';
    }
    close_csv(out, crash_path);
  }
  return {pdr_path, proc_path, crash_path};
}

}  // namespace vcsim

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vcsim/config.hpp"
#include "vcsim/metrics.hpp"
#include "vcsim/simulation.hpp"

namespace vcsim {

/// One parameter swept over a list of values.
struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses `key=v1,v2,...`.
SweepAxis parse_sweep(const std::string& text);

/// Parses `key=value`.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

struct SweepPoint {
  ConfigEntries assignments;  // the swept values of this point
  ExperimentConfig config;
};

/// Cartesian product of the axes (first axis varies slowest). Each point is
/// the base document with overrides and its sweep values applied last.
std::vector<SweepPoint> expand_sweep(const ConfigEntries& base, const std::vector<SweepAxis>& axes);

struct ExperimentRequest {
  ConfigEntries entries;  // config file followed by --override assignments
  std::vector<SweepAxis> sweeps;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  int workers = 1;
};

/// Scheme label used in the CSVs; NoV2V when the radio is switched off.
std::string scheme_label(const ExperimentConfig& config);

struct ExperimentOutcome {
  std::vector<SweepPoint> points;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<ReplicationResult>> results;  // [point][replication]
  ResultTables tables;
};

/// Runs every (point, replication) pair on `workers` threads. Replication k
/// of every point uses replication_seed(master, k); results are gathered
/// in a fixed order, so the outcome does not depend on the worker count.
ExperimentOutcome run_experiment(const ExperimentRequest& request,
                                 const std::function<void(std::size_t done, std::size_t total)>& progress = {});

/// Aggregates per-point results into the CSV tables.
ResultTables tabulate(const std::vector<SweepPoint>& points,
                      const std::vector<std::vector<ReplicationResult>>& results);

struct ManifestInfo {
  std::string started_at;
  std::string finished_at;
  int workers = 1;
  std::vector<std::filesystem::path> files;
};

/// Writes manifest.json next to the CSVs and returns its path.
std::filesystem::path write_manifest(const ExperimentRequest& request, const ExperimentOutcome& outcome,
                                     const ManifestInfo& info, const std::filesystem::path& out_dir);

/// UTC wall-clock timestamp, ISO 8601.
std::string utc_timestamp();

std::string_view version();

}  // namespace vcsim

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vcsim/config.hpp"
#include "vcsim/experiment.hpp"
#include "vcsim/metrics.hpp"
#include "vcsim/radio.hpp"
#include "vcsim/simulation.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kIo = 3, kInvariant = 4 };

vcsim::ConfigEntries load_entries(const std::string& path, const std::vector<std::string>& overrides) {
  vcsim::ConfigEntries entries;
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw vcsim::IoFailure(path, "cannot open config");
    std::stringstream ss;
    ss << in.rdbuf();
    entries = vcsim::parse_entries(ss.str());
  }
  for (const auto& o : overrides) entries.push_back(vcsim::parse_assignment(o));
  return entries;
}

int validate_only(const vcsim::ConfigEntries& entries) {
  const auto config = vcsim::build_config(entries);
  std::set<std::string> user;
  for (const auto& [k, v] : entries) user.insert(k);
  for (const auto& [k, v] : vcsim::resolved_entries(config)) {
    std::printf("%-36s = %-14s # %s\n", k.c_str(), v.c_str(), user.count(k) ? "user" : "default");
  }
  const double tx = vcsim::effective_tx_power(config.radio, config.nominal_range_m);
  std::printf("%-36s = %-14s # %s\n", "effective tx_power_dbm", vcsim::format_number(tx).c_str(),
              config.radio.tx_power_dbm ? "user" : "calibrated");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Highway safety-beaconing simulator with pseudonymous authentication"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "results";
  std::vector<std::string> overrides;
  std::vector<std::string> sweeps;
  std::uint64_t seed = 0;
  int replications = 0;
  int workers = 1;
  bool validate_flag = false;

  auto* run = app.add_subcommand("run", "Run replications (optionally a sweep) and write CSVs");
  run->add_option("--config", config_path, "Config document (key = value lines)")->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  auto* reps_opt = run->add_option("--replications", replications, "Replications per sweep point")
                       ->check(CLI::PositiveNumber);
  run->add_option("--sweep", sweeps, "key=v1,v2,... (repeatable, Cartesian)");
  run->add_option("--override", overrides, "key=value (repeatable)");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_flag("--validate", validate_flag, "Only resolve and print the config");

  auto* val = app.add_subcommand("validate", "Print the resolved config with provenance");
  val->add_option("--config", config_path, "Config document")->check(CLI::ExistingFile);
  val->add_option("--override", overrides, "key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const auto entries = load_entries(config_path, overrides);
    if (val->parsed() || validate_flag) return validate_only(entries);

    vcsim::ExperimentRequest request;
    request.entries = entries;
    for (const auto& s : sweeps) request.sweeps.push_back(vcsim::parse_sweep(s));
    if (seed_opt->count()) request.seed = seed;
    if (reps_opt->count()) request.replications = replications;
    request.workers = workers;

    vcsim::ManifestInfo info;
    info.started_at = vcsim::utc_timestamp();
    info.workers = workers;
    const auto outcome = vcsim::run_experiment(request, [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r%zu/%zu replications", done, total);
      if (done == total) std::fputc('\n', stderr);
    });
    info.files = vcsim::emit_csv(outcome.tables, out_dir);
    info.finished_at = vcsim::utc_timestamp();
    const auto manifest = vcsim::write_manifest(request, outcome, info, out_dir);
    std::printf("%zu points x %zu replications -> %s\n", outcome.points.size(), outcome.seeds.size(),
                manifest.parent_path().string().c_str());
    return kOk;
  } catch (const vcsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const vcsim::IoFailure& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kIo;
  } catch (const vcsim::InvariantViolation& e) {
    std::fprintf(stderr, "invariant violated: %s\n", e.what());
    return kInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInvariant;
  }
}

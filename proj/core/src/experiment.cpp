#include "vcsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "vcsim/rng.hpp"

namespace vcsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view version() { return VCSIM_VERSION; }

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(ConfigErrorKind::Syntax, trim(text), "expected key=value");
  }
  auto key = trim(text.substr(0, eq));
  if (key.empty()) throw ConfigError(ConfigErrorKind::Syntax, text, "empty key");
  return {key, trim(text.substr(eq + 1))};
}

SweepAxis parse_sweep(const std::string& text) {
  auto [key, list] = parse_assignment(text);
  SweepAxis axis{key, {}};
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto item = trim(list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (item.empty()) throw ConfigError(ConfigErrorKind::Syntax, key, "empty value in sweep list");
    axis.values.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return axis;
}

std::vector<SweepPoint> expand_sweep(const ConfigEntries& base, const std::vector<SweepAxis>& axes) {
  std::vector<ConfigEntries> combos{{}};
  for (const auto& axis : axes) {
    std::vector<ConfigEntries> next;
    for (const auto& c : combos) {
      for (const auto& v : axis.values) {
        auto e = c;
        e.emplace_back(axis.key, v);
        next.push_back(std::move(e));
      }
    }
    combos = std::move(next);
  }
  std::vector<SweepPoint> points;
  for (auto& c : combos) {
    ConfigEntries all = base;
    all.insert(all.end(), c.begin(), c.end());
    points.push_back({std::move(c), build_config(all)});
  }
  return points;
}

std::string scheme_label(const ExperimentConfig& config) {
  if (!config.v2v) return "NoV2V";
  return std::string(to_string(config.scheme));
}

ResultTables tabulate(const std::vector<SweepPoint>& points,
                      const std::vector<std::vector<ReplicationResult>>& results) {
  ResultTables t;
  std::map<std::tuple<std::string, int, int>, std::size_t> pdr_index;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const ExperimentConfig& c = points[p].config;
    const ResultKey key{scheme_label(c), c.alpha, c.beta, c.lanes};

    if (c.v2v) {
      const auto pk = std::make_tuple(key.scheme, key.alpha, key.lanes);
      auto it = pdr_index.find(pk);
      if (it == pdr_index.end()) {
        it = pdr_index.emplace(pk, t.pdr.size()).first;
        t.pdr.push_back({key, PdrHistogram{}});
      }
      for (const auto& r : results[p]) t.pdr[it->second].histogram.merge(r.pdr);

      ProcessingTable proc{key, {}};
      for (const auto& r : results[p]) {
        if (proc.kinds.empty()) {
          proc.kinds = r.processing;
          continue;
        }
        for (std::size_t k = 0; k < proc.kinds.size(); ++k) {
          proc.kinds[k].received.merge(r.processing[k].received);
          proc.kinds[k].processed.merge(r.processing[k].processed);
        }
      }
      t.processing.push_back(std::move(proc));
    }

    if (c.emergency) {
      for (const auto& r : results[p]) {
        if (!r.crashes.complete) {
          throw InvariantViolation("run completion",
                                   "platoon still moving at the time limit (seed " + std::to_string(r.seed) + ")");
        }
        t.crashes.push_back({key, r.seed, crash_fraction(r.crashes)});
      }
    }
  }
  return t;
}

ExperimentOutcome run_experiment(const ExperimentRequest& request,
                                 const std::function<void(std::size_t, std::size_t)>& progress) {
  ConfigEntries base = request.entries;
  if (request.seed) base.emplace_back("seed", std::to_string(*request.seed));
  if (request.replications) base.emplace_back("replications", std::to_string(*request.replications));

  ExperimentOutcome out;
  out.points = expand_sweep(base, request.sweeps);
  if (out.points.empty()) return out;

  const std::uint64_t master = out.points.front().config.seed;
  const int reps = out.points.front().config.replications;
  for (int k = 0; k < reps; ++k) out.seeds.push_back(replication_seed(master, static_cast<std::uint64_t>(k)));

  struct Job {
    std::size_t point;
    std::size_t rep;
  };
  std::vector<Job> jobs;
  out.results.resize(out.points.size());
  for (std::size_t p = 0; p < out.points.size(); ++p) {
    const int n = out.points[p].config.replications;
    out.results[p].resize(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) jobs.push_back({p, k});
  }

  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      const ExperimentConfig& c = out.points[job.point].config;
      try {
        out.results[job.point][job.rep] = run_replication(c, replication_seed(c.seed, job.rep));
      } catch (...) {
        errors[j] = std::current_exception();
      }
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, jobs.size());
      }
    }
  };

  const int workers = std::max(1, std::min<int>(request.workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  out.tables = tabulate(out.points, out.results);
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path write_manifest(const ExperimentRequest& request, const ExperimentOutcome& outcome,
                                     const ManifestInfo& info, const std::filesystem::path& out_dir) {
  using nlohmann::json;
  json m;
  m["version"] = version();
  m["started_at"] = info.started_at;
  m["finished_at"] = info.finished_at;
  m["workers"] = info.workers;

  json user = json::array();
  for (const auto& [k, v] : request.entries) user.push_back({{"key", k}, {"value", v}});
  m["user_entries"] = user;

  json sweep = json::array();
  for (const auto& axis : request.sweeps) sweep.push_back({{"key", axis.key}, {"values", axis.values}});
  m["sweep"] = sweep;

  json seeds = json::array();
  for (auto s : outcome.seeds) seeds.push_back(s);
  m["replication_seeds"] = seeds;
  if (!outcome.points.empty()) m["master_seed"] = outcome.points.front().config.seed;

  json points = json::array();
  for (const auto& p : outcome.points) {
    json assign = json::object();
    for (const auto& [k, v] : p.assignments) assign[k] = v;
    json resolved = json::object();
    for (const auto& [k, v] : resolved_entries(p.config)) resolved[k] = v;
    points.push_back({{"assignments", assign}, {"config", resolved}});
  }
  m["points"] = points;

  json files = json::array();
  for (const auto& f : info.files) files.push_back(f.filename().string());
  files.push_back("manifest.json");
  m["files"] = files;

  const auto path = out_dir / "manifest.json";
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoFailure(path, "cannot open for writing");
  f << m.dump(2) << '\n';
  f.flush();
  if (!f) throw IoFailure(path, "write failed");
  return path;
}

}  // namespace vcsim

#include <benchmark/benchmark.h>

#include <vector>

#include "vcsim/radio.hpp"
#include "vcsim/rng.hpp"
#include "vcsim/security.hpp"
#include "vcsim/simulation.hpp"

using namespace vcsim;

static void BM_FadingSample(benchmark::State& state) {
  const RadioParams params;
  const double d = static_cast<double>(state.range(0));
  std::uint64_t frame = 0;
  for (auto _ : state) {
    CounterRng rng(1, Stream::Fading, frame++, 3);
    benchmark::DoNotOptimize(fading_sample(d, rng, params));
  }
}
BENCHMARK(BM_FadingSample)->Arg(20)->Arg(100)->Arg(300);

static void BM_ReceptionDecision(benchmark::State& state) {
  std::vector<Interferer> interferers;
  const SimTime frame = airtime(341, RadioParams{});
  for (int i = 0; i < state.range(0); ++i) {
    const SimTime start = frame * i / (state.range(0) + 1);
    interferers.push_back({start, start + frame, 1e-9 * (i + 1)});
  }
  ReceptionInput in;
  in.start = SimTime{};
  in.end = frame;
  in.signal_mw = 1e-6;
  in.noise_mw = dbm_to_mw(-99.0);
  in.interferers = interferers;
  for (auto _ : state) benchmark::DoNotOptimize(reception_decision(in));
}
BENCHMARK(BM_ReceptionDecision)->Arg(0)->Arg(4)->Arg(32);

static void BM_ReceiverDecide(benchmark::State& state) {
  SecurityProfile prof;
  prof.scheme = Scheme::Hybrid;
  prof.alpha = 10;
  ValidationCache cache;
  PacketMeta p;
  std::uint64_t i = 0;
  for (auto _ : state) {
    p.pseudonym_id = i % 512;
    p.kind = i % 10 == 0 ? PacketKind::Long : PacketKind::Short;
    benchmark::DoNotOptimize(receiver_decide(p, cache, prof));
    ++i;
  }
}
BENCHMARK(BM_ReceiverDecide);

static void BM_SteadyReplication(benchmark::State& state) {
  ExperimentConfig c;
  c.lanes = static_cast<int>(state.range(0));
  c.scheme = Scheme::BP;
  c.alpha = 10;
  c.emergency = false;
  c.warmup_s = 2.0;
  c.steady_duration_s = 3.0;
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_replication(c, seed++).receptions_ok);
}
BENCHMARK(BM_SteadyReplication)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

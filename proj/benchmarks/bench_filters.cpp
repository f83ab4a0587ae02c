#include <benchmark/benchmark.h>

#include "icfpie/consensus.hpp"
#include "icfpie/dicf.hpp"
#include "icfpie/harness.hpp"

using namespace icfpie;

namespace {

EntrySelectionSchedule schedule_for(int which) {
  switch (which) {
    case 1: return EntrySelectionSchedule::case1();
    case 2: return EntrySelectionSchedule::case2();
    default: return EntrySelectionSchedule::identity(4);
  }
}

const Scenario& shared_scenario() {
  static const Scenario sc = build_scenario(ScenarioConfig{}, derive_seed(1, 0));
  return sc;
}

// Arg: 0 identity, 1 case 1, 2 case 2.
void BM_ConsensusRun(benchmark::State& state) {
  const Scenario& sc = shared_scenario();
  const auto schedule = schedule_for(static_cast<int>(state.range(0)));
  Rng rng(3);
  std::normal_distribution<double> g;
  ConsensusState init(static_cast<std::size_t>(sc.network.size()));
  for (auto& node : init) {
    node.B = Matrix::NullaryExpr(4, 4, [&] { return g(rng); });
    node.B = node.B * node.B.transpose();
    node.b = Vector::NullaryExpr(4, [&] { return g(rng); });
  }
  for (auto _ : state) {
    auto out = run_consensus(init, schedule, 12, sc.network, sc.eps());
    benchmark::DoNotOptimize(out.state.front().B.data());
  }
}
BENCHMARK(BM_ConsensusRun)->Arg(0)->Arg(1)->Arg(2);

void BM_DicfStep(benchmark::State& state) {
  const Scenario& sc = shared_scenario();
  const auto schedule = schedule_for(static_cast<int>(state.range(0)));
  DicfParams p;
  p.net = &sc.network;
  p.schedule = &schedule;
  p.consensus_steps = 12;
  p.eps = sc.eps();
  p.n_nodes = sc.network.size();
  std::vector<NodeFilter> nodes = sc.initial_filters();
  std::size_t k = 0;
  for (auto _ : state) {
    if (k == sc.measurements.size()) {
      state.PauseTiming();
      nodes = sc.initial_filters();
      k = 0;
      state.ResumeTiming();
    }
    auto out = dicf_step(nodes, p, sc.measurements[k++], sc.system, sc.W);
    benchmark::DoNotOptimize(out.estimates.data());
  }
}
BENCHMARK(BM_DicfStep)->Arg(0)->Arg(1)->Arg(2);

void BM_CkfStep(benchmark::State& state) {
  const Scenario& sc = shared_scenario();
  InformationState prior = sc.initial_prior();
  std::size_t k = 0;
  for (auto _ : state) {
    if (k == sc.measurements.size()) {
      prior = sc.initial_prior();
      k = 0;
    }
    CkfStep out = ckf_step(prior, sc.measurements[k++], sc.meas_models, sc.system, sc.W);
    prior = std::move(out.next_prior);
    benchmark::DoNotOptimize(prior.q.data());
  }
}
BENCHMARK(BM_CkfStep);

void BM_RunOnce(benchmark::State& state) {
  const Scenario& sc = shared_scenario();
  const auto algs = default_algorithms(sc.cfg);
  for (auto _ : state) {
    RunMetrics m = run_once(sc, static_cast<int>(state.range(0)), algs);
    benchmark::DoNotOptimize(m.series.data());
  }
}
BENCHMARK(BM_RunOnce)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

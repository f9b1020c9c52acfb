#include <benchmark/benchmark.h>

#include "linktheft/eval.hpp"
#include "linktheft/experiment.hpp"
#include "linktheft/rng.hpp"
#include "linktheft/toy.hpp"

using namespace linktheft;

namespace {

void BM_Auc(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> scores(n);
  std::vector<bool> labels(n);
  for (size_t i = 0; i < n; ++i) {
    scores[i] = rng.next_double();
    labels[i] = i % 2 == 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(scores, labels));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

void BM_KmeansBinarize(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  Rng rng(2);
  std::vector<double> distances(n);
  for (double& d : distances)
    d = rng.next_double() < 0.5 ? rng.next_double() * 0.1
                                : 0.5 + rng.next_double();
  for (auto _ : state) {
    auto assign = kmeans_binarize(distances);
    benchmark::DoNotOptimize(assign);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KmeansBinarize)->Arg(1000)->Arg(100000);

void BM_Attack0Cell(benchmark::State& state) {
  Dataset ds = planted_partition_dataset({.communities = 6,
                                          .community_size = 100,
                                          .p_in = 0.03,
                                          .p_out = 0.002,
                                          .attr_dim = 64,
                                          .seed = 3});
  ExperimentConfig cfg;
  ExperimentRunner runner(ds, cfg);
  uint64_t seed = 1;
  for (auto _ : state) {
    AttackRun run = runner.run_attack_cell(0, seed++);
    benchmark::DoNotOptimize(run.result.auc_value);
  }
}
BENCHMARK(BM_Attack0Cell)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

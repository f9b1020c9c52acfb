#include <benchmark/benchmark.h>

#include "linktheft/features.hpp"
#include "linktheft/matrix.hpp"
#include "linktheft/rng.hpp"

using namespace linktheft;

namespace {

Matrix random_posteriors(int rows, int classes, uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, classes);
  for (int i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < classes; ++j) sum += m.at(i, j) = rng.next_double();
    for (int j = 0; j < classes; ++j) m.at(i, j) /= sum;
  }
  return m;
}

void BM_DistanceBlock(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng(1);
  std::vector<double> a(dim), b(dim);
  for (int i = 0; i < dim; ++i) {
    a[i] = rng.next_double();
    b[i] = rng.next_double();
  }
  for (auto _ : state) {
    for (DistanceMetric m : kAllMetrics)
      benchmark::DoNotOptimize(distance(m, a, b));
  }
  state.SetItemsProcessed(state.iterations() * kNumDistanceMetrics);
}
BENCHMARK(BM_DistanceBlock)->Arg(6)->Arg(500)->Arg(3703);

void BM_AssembleAttack3(benchmark::State& state) {
  Matrix f = random_posteriors(2000, 6, 2);
  PairFeatureContext ctx{&f, nullptr, nullptr};
  FeatureSchema schema = FeatureSchema::for_attack(3, 6, 0);
  Rng rng(3);
  for (auto _ : state) {
    const int u = static_cast<int>(rng.below(2000));
    const int v = static_cast<int>(rng.below(2000));
    auto row = assemble(schema, u, v, ctx);
    benchmark::DoNotOptimize(row.data());
  }
}
BENCHMARK(BM_AssembleAttack3);

void BM_AssembleAttack6HighDim(benchmark::State& state) {
  Matrix f = random_posteriors(2000, 6, 2);
  Matrix g = random_posteriors(2000, 6, 4);
  Matrix attrs(2000, 3703);
  Rng arng(5);
  // Sparse binary attributes, citation-style.
  for (int i = 0; i < attrs.rows; ++i)
    for (int w = 0; w < 30; ++w)
      attrs.at(i, static_cast<int>(arng.below(3703))) = 1.0;
  PairFeatureContext ctx{&f, &g, &attrs};
  FeatureSchema schema = FeatureSchema::for_attack(6, 6, 3703);
  Rng rng(6);
  for (auto _ : state) {
    const int u = static_cast<int>(rng.below(2000));
    const int v = static_cast<int>(rng.below(2000));
    auto row = assemble(schema, u, v, ctx);
    benchmark::DoNotOptimize(row.data());
  }
}
BENCHMARK(BM_AssembleAttack6HighDim)->Unit(benchmark::kMicrosecond);

}  // namespace

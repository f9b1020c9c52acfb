#include <benchmark/benchmark.h>

#include "linktheft/graph.hpp"
#include "linktheft/matrix.hpp"
#include "linktheft/models.hpp"
#include "linktheft/nn.hpp"
#include "linktheft/rng.hpp"
#include "linktheft/toy.hpp"

using namespace linktheft;

namespace {

Matrix random_matrix(int rows, int cols, uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-1, 1);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Matrix a = random_matrix(n, n, 1);
  Matrix b = random_matrix(n, 16, 2);
  for (auto _ : state) {
    Matrix c = matmul(a, b);
    benchmark::DoNotOptimize(c.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 2ll * n * n * 16);
}
BENCHMARK(BM_Matmul)->Arg(256)->Arg(1024)->Arg(3072);

void BM_MatmulAttrProjection(benchmark::State& state) {
  // The GCN hot spot: attribute matrix times first-layer weights.
  const int nodes = 3327, attr_dim = 3703, hidden = 16;
  Matrix f = random_matrix(nodes, attr_dim, 3);
  Matrix w = random_matrix(attr_dim, hidden, 4);
  for (auto _ : state) {
    Matrix z = matmul(f, w);
    benchmark::DoNotOptimize(z.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 2ll * nodes * attr_dim * hidden);
}
BENCHMARK(BM_MatmulAttrProjection)->Unit(benchmark::kMillisecond);

void BM_Spmm(benchmark::State& state) {
  Dataset ds = planted_partition_dataset({.communities = 6,
                                          .community_size = 500,
                                          .p_in = 0.004,
                                          .p_out = 0.0004,
                                          .seed = 5});
  Csr n = normalized_adjacency_csr(ds.graph);
  Matrix h = random_matrix(ds.node_count(), 16, 6);
  for (auto _ : state) {
    Matrix z = spmm(n, h);
    benchmark::DoNotOptimize(z.data.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(2 * n.nnz() * 16));
}
BENCHMARK(BM_Spmm);

void BM_GcnTrainEpoch(benchmark::State& state) {
  Dataset ds = planted_partition_dataset({.communities = 6,
                                          .community_size = 200,
                                          .p_in = 0.01,
                                          .p_out = 0.001,
                                          .attr_dim = 512,
                                          .seed = 7});
  std::vector<int> labeled;
  for (int i = 0; i < ds.node_count(); i += 10) labeled.push_back(i);
  TrainConfig cfg;
  cfg.seed = 1;
  for (auto _ : state) {
    cfg.epochs = static_cast<int>(state.range(0));
    GcnModel m = train_gcn(ds, labeled, cfg);
    benchmark::DoNotOptimize(m.weights.data());
  }
}
BENCHMARK(BM_GcnTrainEpoch)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

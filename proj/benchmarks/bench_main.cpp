// Microbenchmarks for the hot paths: sparse propagation, dense matmul,
// forward/backward passes at shallow and deep settings, the collapse
// metrics, synthetic data generation, and the closed-form bound sweep.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "gclab/bounds.hpp"
#include "gclab/csbm.hpp"
#include "gclab/graph.hpp"
#include "gclab/matrix.hpp"
#include "gclab/metrics.hpp"
#include "gclab/model.hpp"
#include "gclab/rng.hpp"

namespace {

using namespace gclab;

SparseGraph random_graph(std::size_t n, double avg_degree, std::uint64_t seed) {
  SeededRng rng(seed);
  const double p = avg_degree / static_cast<double>(n - 1);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (rng.next_unit() < p) edges.emplace_back(i, j);
  return SparseGraph(n, std::move(edges));
}

void bm_spmm(benchmark::State& state) {
  const SparseGraph g = random_graph(2000, 5.0, 1);
  const Propagator p = build_propagator(g);
  SeededRng rng(2);
  const DenseMatrix h = gaussian_matrix(2000, 16, 1.0, rng);
  for (auto _ : state) {
    DenseMatrix out = spmm(p, h);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bm_spmm);

void bm_matmul_256(benchmark::State& state) {
  SeededRng rng(3);
  const DenseMatrix a = gaussian_matrix(256, 256, 1.0, rng);
  const DenseMatrix b = gaussian_matrix(256, 256, 1.0, rng);
  for (auto _ : state) {
    DenseMatrix out = matmul(a, b);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bm_matmul_256);

struct ForwardFixture {
  SparseGraph g = random_graph(500, 5.0, 4);
  Propagator prop = build_propagator(g);
  DenseMatrix x;
  std::vector<int> labels;
  std::vector<std::uint32_t> idx;
  ModelSpec spec;
  ModelParams params;

  explicit ForwardFixture(std::size_t depth) {
    SeededRng rng(5);
    x = gaussian_matrix(500, 64, 1.0, rng);
    labels.resize(500);
    for (std::size_t i = 0; i < 500; ++i) labels[i] = static_cast<int>(i % 2);
    idx.resize(375);
    for (std::size_t i = 0; i < idx.size(); ++i)
      idx[i] = static_cast<std::uint32_t>(i);
    spec.arch = Arch::GCN;
    spec.depth = depth;
    spec.input_dim = 64;
    spec.hidden_dim = 16;
    spec.validate();
    SeededRng init(6);
    params = init_params(spec, init);
  }
};

void bm_forward_gcn(benchmark::State& state) {
  const ForwardFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    ForwardTrace trace = forward(f.spec, f.params, f.prop, f.x);
    benchmark::DoNotOptimize(trace.output.data());
  }
}
BENCHMARK(bm_forward_gcn)->Arg(2)->Arg(8);

void bm_gradients_gcn(benchmark::State& state) {
  const ForwardFixture f(static_cast<std::size_t>(state.range(0)));
  const LossConfig loss{LossKind::Margin, 1.0};
  for (auto _ : state) {
    ModelGradients g = compute_gradients(f.spec, f.params, f.prop, f.x,
                                         f.labels, f.idx, loss);
    benchmark::DoNotOptimize(g.loss);
  }
}
BENCHMARK(bm_gradients_gcn)->Arg(2)->Arg(8);

void bm_collapse_metrics(benchmark::State& state) {
  const SparseGraph g = random_graph(1000, 5.0, 7);
  SeededRng rng(8);
  const DenseMatrix h = gaussian_matrix(1000, 16, 1.0, rng);
  const DenseMatrix basis = degree_profile_basis(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(subspace_distance(h, basis));
    benchmark::DoNotOptimize(dirichlet_energy(h, g));
  }
}
BENCHMARK(bm_collapse_metrics);

void bm_csbm_generate(benchmark::State& state) {
  CsbmParams params;
  params.n = 1000;
  params.feature_dim = 100;
  for (auto _ : state) {
    params.seed += 1;  // fresh draw each iteration
    LabeledGraph data = generate(params);
    benchmark::DoNotOptimize(data.features.data());
  }
}
BENCHMARK(bm_csbm_generate);

void bm_stability_sweep(benchmark::State& state) {
  const Arch archs[] = {Arch::GCN, Arch::ResGCN, Arch::APPNP, Arch::GCNII,
                        Arch::DGCN};
  for (auto _ : state) {
    double acc = 0.0;
    for (Arch arch : archs)
      for (std::size_t l : {2, 4, 8})
        for (double d : {4.0, 8.0, 12.0})
          for (double b_w : {1.0, 2.0, 5.0}) {
            StabilityInputs in;
            in.l = l;
            in.d = d;
            in.b_w = b_w;
            in.t = 10;
            acc += epsilon_stability(constants_for(arch, in), in);
          }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(bm_stability_sweep);

}  // namespace

BENCHMARK_MAIN();

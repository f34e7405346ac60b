#include <benchmark/benchmark.h>

#include "recall/assoc_mem.hpp"
#include "recall/dynamics.hpp"
#include "recall/hermite.hpp"
#include "recall/numerics.hpp"
#include "recall/rng.hpp"
#include "recall/training.hpp"
#include "recall/transformer.hpp"

using namespace recall;

namespace {

void BM_softmax(benchmark::State& state) {
  Rng rng(1);
  Vector v(static_cast<std::size_t>(state.range(0)));
  for (double& x : v) x = rng.next_gaussian();
  for (auto _ : state) {
    Vector out = softmax(v);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_softmax)->Arg(64)->Arg(512);

void BM_hermite_pair_contract(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  Rng rng(2);
  for (auto _ : state) {
    double v = hermite_pair_contract(rng.next_gaussian(), rng.next_gaussian(),
                                     1.0, 1.0, 0.1, p, p);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_hermite_pair_contract)->Arg(3)->Arg(7);

void BM_linear_am_build(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  AssociationMap map = AssociationMap::identity(n);
  EmbeddingTable e = sample_sphere_table(n, 64, 1);
  EmbeddingTable u = sample_sphere_table(n, 64, 2);
  for (auto _ : state) {
    LinearAM am = build_linear(map, e, u);
    benchmark::DoNotOptimize(am.w.data());
  }
}
BENCHMARK(BM_linear_am_build)->Arg(64)->Arg(256);

void BM_tf_forward(benchmark::State& state) {
  TransformerHyper hy{64, 8, 8, 256};
  TransformerParams params = TransformerParams::zeros(hy);
  Rng rng(3);
  for (Matrix* m : {&params.mlp_w, &params.mlp_v}) {
    for (double& v : m->flat()) v = 0.1 * rng.next_gaussian();
  }
  for (std::size_t h = 0; h < hy.H; ++h)
    for (Matrix* m : {&params.wk[h], &params.wq[h], &params.wv[h], &params.wo[h]})
      for (double& v : m->flat()) v = 0.1 * rng.next_gaussian();
  Matrix x(32, hy.d);
  for (double& v : x.flat()) v = rng.next_gaussian();
  TfWorkspace ws;
  for (auto _ : state) {
    Vector out = tf_forward(params, x, ws);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_tf_forward);

void BM_train_step(benchmark::State& state) {
  FactDictionary dict = gen_dictionary(16, 16, 8, 1);
  EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), 64, 2);
  TransformerHyper hy{64, 8, 8, 256};
  TransformerParams params = TransformerParams::zeros(hy);
  Rng rng(3);
  for (std::size_t h = 0; h < hy.H; ++h)
    for (Matrix* m : {&params.wk[h], &params.wq[h], &params.wv[h], &params.wo[h]})
      for (double& v : m->flat()) v = 0.125 * rng.next_gaussian();
  for (Matrix* m : {&params.mlp_w, &params.mlp_v})
    for (double& v : m->flat()) v = 0.125 * rng.next_gaussian();
  SrDistribution p = SrDistribution::uniform(16, 16);
  std::vector<Sequence> batch;
  for (int i = 0; i < 256; ++i) batch.push_back(sample_sequence(dict, 32, p, rng));
  TfGradients grads = TfGradients::zeros(hy);
  for (auto _ : state) {
    double loss = loss_and_grads(params, batch, emb, grads);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_train_step)->Unit(benchmark::kMillisecond);

void BM_population_grads_exact(benchmark::State& state) {
  FactDictionary dict = gen_dictionary(16, 4, 8, 1, AnswerAssignment::kBalanced);
  LinAttnParams params = init_balanced(dict, 1e-5);
  for (auto _ : state) {
    GradTables g = population_grads_exact(params, dict, 32);
    benchmark::DoNotOptimize(g.ov.data());
  }
}
BENCHMARK(BM_population_grads_exact);

}  // namespace

BENCHMARK_MAIN();

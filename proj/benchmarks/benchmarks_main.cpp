#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mutadetect/kmeans.hpp"
#include "mutadetect/metrics.hpp"
#include "mutadetect/model.hpp"
#include "mutadetect/rng.hpp"
#include "mutadetect/tape.hpp"
#include "mutadetect/tensor.hpp"

namespace md = mutadetect;

namespace {

md::Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  std::vector<double> vals(n);
  for (double& v : vals) v = md::uniform_real(rng, -1.0, 1.0);
  return md::Tensor::from(std::move(shape), std::move(vals));
}

void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  md::Tensor a = random_tensor(rng, {n, n});
  md::Tensor b = random_tensor(rng, {n, n});
  for (auto _ : state) {
    md::Tape tape;
    benchmark::DoNotOptimize(tape.matmul(a, b));
  }
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(256);

void BM_lstm_step(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  md::ModelHyper hyper;
  hyper.input_dim = 100;
  hyper.hidden = 128;
  md::ModelParams p = md::init_params(hyper, 1);
  std::mt19937_64 rng(7);
  md::Tensor h = random_tensor(rng, {batch, hyper.hidden});
  md::Tensor s = random_tensor(rng, {batch, hyper.hidden});
  md::Tensor x = random_tensor(rng, {batch, hyper.input_dim});
  for (auto _ : state) {
    md::Tape tape;
    benchmark::DoNotOptimize(md::lstm_step(tape, h, s, x, p));
  }
}
BENCHMARK(BM_lstm_step)->Arg(32)->Arg(256);

void BM_encode_backward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  md::ModelHyper hyper;
  hyper.input_dim = 100;
  hyper.hidden = 128;
  hyper.attention_dim = 64;
  hyper.out_dim = 32;
  md::ModelParams p = md::init_params(hyper, 1);
  std::mt19937_64 rng(7);
  std::vector<md::Tensor> xs;
  for (int t = 0; t < 5; ++t) xs.push_back(random_tensor(rng, {batch, hyper.input_dim}));
  for (auto _ : state) {
    md::Tape tape;
    md::Tensor phi = md::project(tape, md::encode(tape, xs, p).hhat, p);
    md::Tensor loss = tape.sum(tape.row_sq_norm(phi));
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_encode_backward)->Arg(32)->Arg(256);

void BM_kmeans(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(7);
  std::vector<std::vector<double>> points(n, std::vector<double>(16));
  for (auto& p : points)
    for (double& v : p) v = md::uniform_real(gen, -1.0, 1.0);
  for (auto _ : state) {
    std::mt19937_64 rng(11);
    benchmark::DoNotOptimize(md::cluster_cohort(points, 3, rng, 4));
  }
}
BENCHMARK(BM_kmeans)->Arg(20)->Arg(200);

void BM_roc_auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = md::uniform_real(rng, 0.0, 1.0);
    labels[i] = md::uniform_index(rng, 2) == 0 ? 0 : 1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(md::roc_auc(scores, labels));
}
BENCHMARK(BM_roc_auc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();

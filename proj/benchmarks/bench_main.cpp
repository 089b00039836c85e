#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mtlw/autodiff/ops.hpp"
#include "mtlw/net/multi_exit_net.hpp"
#include "mtlw/weighting/loss_weighting.hpp"

namespace {

using namespace mtlw;

ad::Tensor random_tensor(ad::Shape shape, std::uint64_t seed, bool grad) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(ad::shape_size(shape));
  for (double& x : v) x = u(rng);
  return ad::Tensor::from(std::move(shape), std::move(v), grad);
}

// args: batch, c_in, c_out, spatial side
void BM_Conv2dForward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2));
  const auto side = static_cast<std::size_t>(state.range(3));
  const ad::Tensor x = random_tensor({b, cin, side, side}, 1, false);
  const ad::Tensor w = random_tensor({cout, cin, 3, 3}, 2, false);
  for (auto _ : state) {
    ad::Tape tape(false);
    benchmark::DoNotOptimize(ad::conv2d(tape, x, w, 1, 1));
  }
  state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(b * cin * cout * 9 * side * side),
                                               benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Conv2dBackward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2));
  const auto side = static_cast<std::size_t>(state.range(3));
  ad::Tensor x = random_tensor({b, cin, side, side}, 1, true);
  ad::Tensor w = random_tensor({cout, cin, 3, 3}, 2, true);
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Tensor y = ad::conv2d(tape, x, w, 1, 1);
    const ad::Tensor loss = ad::sum(tape, y);
    tape.backward(loss);
  }
  state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(3 * b * cin * cout * 9 * side * side),
                                               benchmark::Counter::kIsIterationInvariantRate);
}

void conv_shapes(benchmark::internal::Benchmark* bm) {
  bm->Args({32, 1, 16, 64})
      ->Args({32, 16, 16, 64})
      ->Args({32, 16, 32, 32})
      ->Args({32, 32, 32, 32})
      ->Args({32, 32, 64, 16})
      ->Args({32, 64, 64, 16})
      ->Args({32, 64, 64, 8})
      ->Args({32, 128, 128, 4})
      ->Unit(benchmark::kMillisecond);
}
BENCHMARK(BM_Conv2dForward)->Apply(conv_shapes);
BENCHMARK(BM_Conv2dBackward)->Apply(conv_shapes);

void BM_NetTrainStep(benchmark::State& state) {
  net::NetConfig cfg;
  cfg.input_width = 64;
  const net::MultiExitNet model(cfg, 0);
  const ad::Tensor x = random_tensor({32, 1, 64, 64}, 3, false);
  for (auto _ : state) {
    ad::Tape tape;
    const net::MultiExitOutput out = model.forward(tape, x);
    const ad::Tensor loss = ad::add(tape, ad::add(tape, ad::sum(tape, out.emotion), ad::sum(tape, out.country_logits)),
                                    ad::sum(tape, out.age));
    tape.backward(loss);
  }
}
BENCHMARK(BM_NetTrainStep)->Unit(benchmark::kMillisecond);

void BM_NetForwardEval(benchmark::State& state) {
  net::NetConfig cfg;
  cfg.input_width = 64;
  const net::MultiExitNet model(cfg, 0);
  const ad::Tensor x = random_tensor({32, 1, 64, 64}, 3, false);
  for (auto _ : state) {
    ad::Tape tape(false);
    benchmark::DoNotOptimize(model.forward(tape, x));
  }
}
BENCHMARK(BM_NetForwardEval)->Unit(benchmark::kMillisecond);

void BM_CombineDruw(benchmark::State& state) {
  const weighting::UncertaintyParams params(3);
  const weighting::WeightingConfig config;
  weighting::LossHistory history;
  history.prev = std::vector<double>{0.5, 1.2, 0.8};
  history.prev2 = std::vector<double>{0.6, 1.3, 0.9};
  std::vector<ad::Tensor> losses;
  for (double v : {0.4, 1.1, 0.7}) {
    losses.push_back(ad::Tensor::scalar(v, true));
  }
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Tensor total = weighting::combine_druw(tape, losses, params, history, config);
    tape.backward(total);
  }
}
BENCHMARK(BM_CombineDruw);

}  // namespace

BENCHMARK_MAIN();

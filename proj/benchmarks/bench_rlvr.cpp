#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ferkit/labels.hpp"
#include "ferkit/rlvr.hpp"
#include "ferkit/rng.hpp"

using namespace ferkit;

namespace {

// One scored group per (vocab, length, G) point, built outside the timing
// loop so the benchmarks isolate the math.
RolloutGroup scored_group(const ToyPolicy& old_policy, std::size_t g, std::uint64_t seed) {
  RolloutGroup group = toy_rollout(old_policy, 17, g, seed);
  for (std::size_t i = 0; i < g; ++i) {
    group.rewards[i] = static_cast<double>(i % 3);
  }
  group.advantages = group_advantages(group.rewards);
  return group;
}

void BM_GrpoObjective(benchmark::State& state) {
  const auto vocab = static_cast<std::size_t>(state.range(0));
  const auto length = static_cast<std::size_t>(state.range(1));
  const auto g = static_cast<std::size_t>(state.range(2));
  const ToyPolicy old_policy = ToyPolicy::random(length, vocab, 7, 1.5);
  const ToyPolicy policy = ToyPolicy::random(length, vocab, 8, 1.5);
  const RolloutGroup group = scored_group(old_policy, g, 99);
  const GrpoConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grpo_objective(policy, group, cfg));
  }
}
BENCHMARK(BM_GrpoObjective)->Args({8, 4, 8})->Args({32, 16, 8})->Args({128, 32, 16});

void BM_GrpoGradient(benchmark::State& state) {
  const auto vocab = static_cast<std::size_t>(state.range(0));
  const auto length = static_cast<std::size_t>(state.range(1));
  const auto g = static_cast<std::size_t>(state.range(2));
  const ToyPolicy old_policy = ToyPolicy::random(length, vocab, 7, 1.5);
  const ToyPolicy policy = ToyPolicy::random(length, vocab, 8, 1.5);
  const RolloutGroup group = scored_group(old_policy, g, 100);
  const GrpoConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grpo_gradient(policy, group, cfg));
  }
}
BENCHMARK(BM_GrpoGradient)->Args({8, 4, 8})->Args({32, 16, 8})->Args({128, 32, 16});

void BM_SftGradient(benchmark::State& state) {
  const auto vocab = static_cast<std::size_t>(state.range(0));
  const auto length = static_cast<std::size_t>(state.range(1));
  const ToyPolicy policy = ToyPolicy::random(length, vocab, 9, 1.5);
  Rng rng(10);
  std::vector<std::size_t> target(length);
  for (auto& t : target) t = rng.uniform_index(vocab);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sft_nll_gradient(policy, target));
  }
}
BENCHMARK(BM_SftGradient)->Args({8, 4})->Args({32, 16})->Args({128, 32});

void BM_ToyRollout(benchmark::State& state) {
  const auto g = static_cast<std::size_t>(state.range(0));
  const ToyPolicy policy = ToyPolicy::random(16, 32, 11, 1.5);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(toy_rollout(policy, 5, g, seed++));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ToyRollout)->Arg(4)->Arg(8)->Arg(16);

void BM_Reward(benchmark::State& state) {
  const auto& panel = label_set(DatasetId::ferplus);
  const std::string response =
      "<think>the mouth corners rise and the eyes narrow slightly, with soft "
      "creases at the outer corners</think><answer>happiness</answer>";
  for (auto _ : state) {
    benchmark::DoNotOptimize(reward(response, EmotionLabel::happiness, panel));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Reward);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ferkit/metrics.hpp"
#include "ferkit/rng.hpp"

using namespace ferkit;

namespace {

std::vector<EvalRecord> synthetic_records(std::size_t n, DatasetId dataset, std::uint64_t seed) {
  Rng rng(seed);
  const auto& panel = label_set(dataset);
  std::vector<EvalRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    EvalRecord r;
    r.id = "b" + std::to_string(i);
    r.dataset = dataset;
    r.model = "bench";
    r.gt = panel[rng.uniform_index(panel.size())];
    const double roll = rng.next_double();
    if (roll < 0.55) {
      r.extracted_label = r.gt;
    } else if (roll < 0.9) {
      r.extracted_label = panel[rng.uniform_index(panel.size())];
    }
    r.extraction_method =
        r.extracted_label ? ExtractionMethod::tagged : ExtractionMethod::failed;
    r.correct = r.extracted_label && *r.extracted_label == r.gt;
    out.push_back(std::move(r));
  }
  return out;
}

void BM_Accuracy(benchmark::State& state) {
  const auto records = synthetic_records(static_cast<std::size_t>(state.range(0)),
                                         DatasetId::ferplus, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(accuracy(records));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Accuracy)->Range(1 << 10, 1 << 16);

void BM_Confusion(benchmark::State& state) {
  const auto records = synthetic_records(static_cast<std::size_t>(state.range(0)),
                                         DatasetId::ferplus, 12);
  const auto& panel = label_set(DatasetId::ferplus);
  for (auto _ : state) {
    benchmark::DoNotOptimize(confusion(records, panel));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Confusion)->Range(1 << 10, 1 << 16);

void BM_MacroF1(benchmark::State& state) {
  const auto records = synthetic_records(static_cast<std::size_t>(state.range(0)),
                                         DatasetId::ferplus, 13);
  const auto& panel = label_set(DatasetId::ferplus);
  for (auto _ : state) {
    benchmark::DoNotOptimize(macro_f1(records, panel));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MacroF1)->Range(1 << 10, 1 << 16);

void BM_AggregateTwoDatasets(benchmark::State& state) {
  std::map<DatasetId, std::vector<EvalRecord>> by_dataset;
  const auto n = static_cast<std::size_t>(state.range(0));
  by_dataset[DatasetId::rafdb] = synthetic_records(n, DatasetId::rafdb, 14);
  by_dataset[DatasetId::ferplus] = synthetic_records(n, DatasetId::ferplus, 15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aggregate("bench", by_dataset));
  }
  state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_AggregateTwoDatasets)->Range(1 << 10, 1 << 14);

void BM_ConfusionSvg(benchmark::State& state) {
  const auto records = synthetic_records(4096, DatasetId::ferplus, 16);
  const ConfusionMatrix cm = confusion(records, label_set(DatasetId::ferplus));
  for (auto _ : state) {
    benchmark::DoNotOptimize(confusion_svg(cm));
  }
}
BENCHMARK(BM_ConfusionSvg);

}  // namespace

BENCHMARK_MAIN();

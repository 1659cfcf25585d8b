#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ferkit/curation.hpp"
#include "ferkit/prompting.hpp"
#include "ferkit/rng.hpp"

using namespace ferkit;

namespace {

QuestionPool bench_pool() {
  QuestionPool pool;
  pool.seed = default_seed_question();
  for (int i = 0; i < 20; ++i) {
    pool.variants.push_back("Variant " + std::to_string(i) +
                            ": name the expression among {candidates}.");
  }
  pool.k = pool.variants.size();
  return pool;
}

void BM_BuildVqaRecord(benchmark::State& state) {
  const QuestionPool pool = bench_pool();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_vqa_record("img.png", EmotionLabel::happiness, DatasetId::ferplus, pool, seed++));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BuildVqaRecord);

void BM_AssembleRlvr(benchmark::State& state) {
  const QuestionPool pool = bench_pool();
  Rng rng(21);
  const auto& panel = label_set(DatasetId::ferplus);
  std::vector<AssemblyPair> pairs(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].image = "img" + std::to_string(i) + ".png";
    pairs[i].label = panel[rng.uniform_index(panel.size())];
    pairs[i].dataset = DatasetId::ferplus;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_rlvr(pairs, pool, 4242));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AssembleRlvr)->Range(1 << 8, 1 << 12);

void BM_QcFilter(benchmark::State& state) {
  const auto& panel = label_set(DatasetId::ferplus);
  std::vector<CotRecord> corpus(static_cast<std::size_t>(state.range(0)));
  Rng rng(22);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CotRecord& r = corpus[i];
    r.vqa.id = "ferplus:q" + std::to_string(i);
    r.vqa.dataset = DatasetId::ferplus;
    r.vqa.image = "x.png";
    r.vqa.question = "Pick one of {candidates}.";
    r.vqa.candidates = panel;
    r.vqa.label = EmotionLabel::happiness;
    switch (rng.uniform_index(4)) {
      case 0:
        r.raw_output = "missing think <answer>happiness</answer>";
        break;
      case 1:
        r.raw_output = "<think>downcast</think><answer>sadness</answer>";
        break;
      case 2:
        r.raw_output = "<think>too blurry to call</think><answer>happiness</answer>";
        break;
      default:
        r.raw_output = "<think>clear smile with raised cheeks</think><answer>happiness</answer>";
        break;
    }
  }
  for (auto _ : state) {
    std::vector<CotRecord> records = corpus;
    benchmark::DoNotOptimize(filter_records(records));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QcFilter)->Range(1 << 8, 1 << 12);

void BM_WordFrequencies(benchmark::State& state) {
  std::vector<std::string> texts(static_cast<std::size_t>(state.range(0)),
                                 "The corners of the mouth are pulled upward while the eyes "
                                 "narrow slightly, a pattern typical of genuine amusement");
  for (auto _ : state) {
    benchmark::DoNotOptimize(word_frequencies(texts, default_stop_words()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WordFrequencies)->Range(1 << 6, 1 << 10);

}  // namespace

BENCHMARK_MAIN();

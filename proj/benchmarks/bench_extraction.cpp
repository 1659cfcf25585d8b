#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ferkit/extraction.hpp"
#include "ferkit/labels.hpp"
#include "ferkit/rng.hpp"

using namespace ferkit;

namespace {

// Filler prose keeps the scan honest: real responses bury the answer in
// sentences that mention no label at all.
std::string filler(Rng& rng, std::size_t words) {
  static const char* kWords[] = {"the",  "face",   "shows", "a",      "slight", "tension",
                                 "around", "eyes", "and",   "mouth",  "with",   "brows",
                                 "drawn", "while",  "skin",  "creases", "near",  "nose"};
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    out += kWords[rng.uniform_index(std::size(kWords))];
    out += ' ';
  }
  return out;
}

std::vector<std::string> tagged_corpus(std::size_t n, std::size_t words) {
  Rng rng(1);
  const auto& panel = label_set(DatasetId::ferplus);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EmotionLabel label = panel[rng.uniform_index(panel.size())];
    out.push_back("<think>" + filler(rng, words) + "</think><answer>" +
                  std::string(to_string(label)) + "</answer>");
  }
  return out;
}

std::vector<std::string> mention_corpus(std::size_t n, std::size_t words) {
  Rng rng(2);
  const auto& panel = label_set(DatasetId::ferplus);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EmotionLabel label = panel[rng.uniform_index(panel.size())];
    out.push_back(filler(rng, words) + "so this is " + std::string(to_string(label)) + ".");
  }
  return out;
}

void BM_ExtractTagged(benchmark::State& state) {
  const auto corpus = tagged_corpus(256, static_cast<std::size_t>(state.range(0)));
  const auto& panel = label_set(DatasetId::ferplus);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_answer(corpus[i++ % corpus.size()], panel));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractTagged)->Arg(16)->Arg(64)->Arg(256);

void BM_ExtractFallbackMention(benchmark::State& state) {
  const auto corpus = mention_corpus(256, static_cast<std::size_t>(state.range(0)));
  const auto& panel = label_set(DatasetId::ferplus);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_answer(corpus[i++ % corpus.size()], panel));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractFallbackMention)->Arg(16)->Arg(64)->Arg(256);

void BM_ExtractNothing(benchmark::State& state) {
  Rng rng(3);
  const std::string text = filler(rng, static_cast<std::size_t>(state.range(0)));
  const auto& panel = label_set(DatasetId::ferplus);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_answer(text, panel));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractNothing)->Arg(64)->Arg(512);

void BM_ParseLabel(benchmark::State& state) {
  const auto& panel = label_set(DatasetId::ferplus);
  const std::vector<std::string> inputs = {"happiness", "  Surprised ", "the face looks mad",
                                           "neutral calm"};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_label(inputs[i++ % inputs.size()], panel));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseLabel);

}  // namespace

BENCHMARK_MAIN();

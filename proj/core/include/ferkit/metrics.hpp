#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ferkit/labels.hpp"
#include "ferkit/records.hpp"

namespace ferkit {

// Row = ground truth, column = prediction, in `labels` order. Failed
// extractions land in the per-row overflow column so rows stay complete.
struct ConfusionMatrix {
  std::vector<EmotionLabel> labels;
  std::vector<std::vector<std::size_t>> counts;  // |labels| x |labels|
  std::vector<std::size_t> overflow;             // per row

  std::size_t total() const;
  std::size_t row_sum(std::size_t row) const;
  // Rows sum to 1 for non-empty rows; empty rows stay all-zero.
  std::vector<std::vector<double>> row_normalized() const;  // includes overflow column
};

struct ClassScore {
  EmotionLabel label = EmotionLabel::anger;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassReport {
  std::vector<ClassScore> classes;
};

struct DatasetReport {
  DatasetId dataset = DatasetId::rafdb;
  std::size_t record_count = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  ClassReport class_report;
  ConfusionMatrix confusion;
};

struct EvalReport {
  std::string model;
  std::vector<DatasetReport> per_dataset;
  std::size_t record_count = 0;
  double overall_accuracy = 0.0;  // micro: pooled correct / pooled total
  double overall_macro_f1 = 0.0;  // macro over pooled records, union label set

  std::string to_json() const;
  static EvalReport from_json(std::string_view text);
};

// Failed extractions count as incorrect. Throws EmptyInput.
double accuracy(std::span<const EvalRecord> records);

// One-vs-rest scores per label; zero-denominator cases score 0.
ClassReport per_class_f1(std::span<const EvalRecord> records, std::span<const EmotionLabel> labels);

// Unweighted mean of per-class F1 over the full label set.
double macro_f1(std::span<const EvalRecord> records, std::span<const EmotionLabel> labels);

ConfusionMatrix confusion(std::span<const EvalRecord> records, std::span<const EmotionLabel> labels);

DatasetReport dataset_report(DatasetId dataset, std::span<const EvalRecord> records,
                             std::span<const EmotionLabel> labels);

// Pools raw records: overall accuracy is sample-weighted, overall macro-F1 is
// computed on the concatenation over the union of the per-dataset label sets.
EvalReport aggregate(const std::string& model,
                     const std::map<DatasetId, std::vector<EvalRecord>>& by_dataset,
                     const LabelConfig& config = LabelConfig::defaults());

std::string confusion_csv(const ConfusionMatrix& cm);
std::string confusion_svg(const ConfusionMatrix& cm);

// Leaderboard rows sorted by overall accuracy desc, ties by macro-F1 desc,
// then model name asc.
std::vector<const EvalReport*> rank_reports(std::span<const EvalReport> reports);
std::string leaderboard_markdown(std::span<const EvalReport> reports);
std::string leaderboard_json(std::span<const EvalReport> reports);

}  // namespace ferkit

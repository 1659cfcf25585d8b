#include "ferkit/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"

#include "ferkit/errors.hpp"

namespace ferkit {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string pct2(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::size_t index_of(std::span<const EmotionLabel> labels, EmotionLabel l) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == l) return i;
  }
  return labels.size();
}

ordered_json confusion_to_json(const ConfusionMatrix& cm) {
  ordered_json doc;
  ordered_json labels = ordered_json::array();
  for (EmotionLabel l : cm.labels) labels.push_back(std::string(to_string(l)));
  doc["labels"] = std::move(labels);
  doc["counts"] = cm.counts;
  doc["overflow"] = cm.overflow;
  return doc;
}

ConfusionMatrix confusion_from_json(const ordered_json& doc) {
  ConfusionMatrix cm;
  for (const auto& item : doc.at("labels")) {
    const auto label = label_from_token(item.get<std::string>());
    if (!label) throw ParseError("confusion labels entry is not a label token");
    cm.labels.push_back(*label);
  }
  cm.counts = doc.at("counts").get<std::vector<std::vector<std::size_t>>>();
  cm.overflow = doc.at("overflow").get<std::vector<std::size_t>>();
  if (cm.counts.size() != cm.labels.size() || cm.overflow.size() != cm.labels.size()) {
    throw ParseError("confusion matrix shape disagrees with its label list");
  }
  return cm;
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) n += row_sum(i);
  return n;
}

std::size_t ConfusionMatrix::row_sum(std::size_t row) const {
  std::size_t n = overflow[row];
  for (std::size_t c : counts[row]) n += c;
  return n;
}

std::vector<std::vector<double>> ConfusionMatrix::row_normalized() const {
  std::vector<std::vector<double>> out(counts.size(),
                                       std::vector<double>(labels.size() + 1, 0.0));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::size_t denom = row_sum(i);
    if (denom == 0) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      out[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(denom);
    }
    out[i][labels.size()] = static_cast<double>(overflow[i]) / static_cast<double>(denom);
  }
  return out;
}

double accuracy(std::span<const EvalRecord> records) {
  if (records.empty()) throw EmptyInput("accuracy over zero records");
  std::size_t correct = 0;
  for (const EvalRecord& r : records) correct += r.correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

ClassReport per_class_f1(std::span<const EvalRecord> records,
                         std::span<const EmotionLabel> labels) {
  if (records.empty()) throw EmptyInput("per-class scores over zero records");
  ClassReport report;
  for (EmotionLabel l : labels) {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    for (const EvalRecord& r : records) {
      const bool gt_is = r.gt == l;
      const bool pred_is = r.extracted_label && *r.extracted_label == l;
      support += gt_is ? 1 : 0;
      tp += (gt_is && pred_is) ? 1 : 0;
      fp += (!gt_is && pred_is) ? 1 : 0;
      fn += (gt_is && !pred_is) ? 1 : 0;
    }
    ClassScore s;
    s.label = l;
    s.support = support;
    s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    report.classes.push_back(s);
  }
  return report;
}

double macro_f1(std::span<const EvalRecord> records, std::span<const EmotionLabel> labels) {
  const ClassReport report = per_class_f1(records, labels);
  double sum = 0.0;
  for (const ClassScore& s : report.classes) sum += s.f1;
  return sum / static_cast<double>(report.classes.size());
}

ConfusionMatrix confusion(std::span<const EvalRecord> records,
                          std::span<const EmotionLabel> labels) {
  if (records.empty()) throw EmptyInput("confusion over zero records");
  ConfusionMatrix cm;
  cm.labels.assign(labels.begin(), labels.end());
  cm.counts.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
  cm.overflow.assign(labels.size(), 0);
  for (const EvalRecord& r : records) {
    const std::size_t row = index_of(labels, r.gt);
    if (row == labels.size()) {
      throw Error("record ground truth '" + std::string(to_string(r.gt)) +
                  "' is outside the label set");
    }
    // Predictions outside the panel land with failed extractions: neither
    // belongs to any listed class.
    const std::size_t col =
        r.extracted_label ? index_of(labels, *r.extracted_label) : labels.size();
    if (col == labels.size()) {
      ++cm.overflow[row];
    } else {
      ++cm.counts[row][col];
    }
  }
  return cm;
}

DatasetReport dataset_report(DatasetId dataset, std::span<const EvalRecord> records,
                             std::span<const EmotionLabel> labels) {
  DatasetReport report;
  report.dataset = dataset;
  report.record_count = records.size();
  report.accuracy = accuracy(records);
  report.class_report = per_class_f1(records, labels);
  double sum = 0.0;
  for (const ClassScore& s : report.class_report.classes) sum += s.f1;
  report.macro_f1 = sum / static_cast<double>(report.class_report.classes.size());
  report.confusion = confusion(records, labels);
  return report;
}

EvalReport aggregate(const std::string& model,
                     const std::map<DatasetId, std::vector<EvalRecord>>& by_dataset,
                     const LabelConfig& config) {
  if (by_dataset.empty()) throw EmptyInput("aggregate over zero datasets");
  EvalReport report;
  report.model = model;
  std::vector<EvalRecord> pooled;
  std::set<EmotionLabel> union_set;
  for (const auto& [dataset, records] : by_dataset) {
    if (records.empty()) throw EmptyInput("aggregate with an empty dataset");
    const std::vector<EmotionLabel>& labels = config.set_for(dataset);
    report.per_dataset.push_back(dataset_report(dataset, records, labels));
    pooled.insert(pooled.end(), records.begin(), records.end());
    union_set.insert(labels.begin(), labels.end());
  }
  const std::vector<EmotionLabel> union_labels(union_set.begin(), union_set.end());
  report.record_count = pooled.size();
  report.overall_accuracy = accuracy(pooled);
  report.overall_macro_f1 = macro_f1(pooled, union_labels);
  return report;
}

std::string EvalReport::to_json() const {
  ordered_json doc;
  doc["model"] = model;
  doc["record_count"] = record_count;
  doc["overall"] = {{"accuracy", overall_accuracy}, {"macro_f1", overall_macro_f1}};
  ordered_json datasets = ordered_json::array();
  for (const DatasetReport& d : per_dataset) {
    ordered_json entry;
    entry["dataset"] = std::string(to_string(d.dataset));
    entry["record_count"] = d.record_count;
    entry["accuracy"] = d.accuracy;
    entry["macro_f1"] = d.macro_f1;
    ordered_json classes = ordered_json::array();
    for (const ClassScore& s : d.class_report.classes) {
      classes.push_back({{"label", std::string(to_string(s.label))},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f1", s.f1},
                         {"support", s.support}});
    }
    entry["classes"] = std::move(classes);
    entry["confusion"] = confusion_to_json(d.confusion);
    datasets.push_back(std::move(entry));
  }
  doc["per_dataset"] = std::move(datasets);
  return doc.dump(2);
}

EvalReport EvalReport::from_json(std::string_view text) {
  ordered_json doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ParseError("report is not a JSON object");
  try {
    EvalReport report;
    report.model = doc.at("model").get<std::string>();
    report.record_count = doc.at("record_count").get<std::size_t>();
    report.overall_accuracy = doc.at("overall").at("accuracy").get<double>();
    report.overall_macro_f1 = doc.at("overall").at("macro_f1").get<double>();
    for (const auto& entry : doc.at("per_dataset")) {
      DatasetReport d;
      const auto dataset = dataset_from_token(entry.at("dataset").get<std::string>());
      if (!dataset) throw ParseError("report dataset token unknown");
      d.dataset = *dataset;
      d.record_count = entry.at("record_count").get<std::size_t>();
      d.accuracy = entry.at("accuracy").get<double>();
      d.macro_f1 = entry.at("macro_f1").get<double>();
      for (const auto& c : entry.at("classes")) {
        ClassScore s;
        const auto label = label_from_token(c.at("label").get<std::string>());
        if (!label) throw ParseError("report class label unknown");
        s.label = *label;
        s.precision = c.at("precision").get<double>();
        s.recall = c.at("recall").get<double>();
        s.f1 = c.at("f1").get<double>();
        s.support = c.at("support").get<std::size_t>();
        d.class_report.classes.push_back(s);
      }
      d.confusion = confusion_from_json(entry.at("confusion"));
      report.per_dataset.push_back(std::move(d));
    }
    return report;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("report: ") + ex.what());
  }
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "gt";
  for (EmotionLabel l : cm.labels) {
    out += ',';
    out += to_string(l);
  }
  out += ",failed\n";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    out += to_string(cm.labels[i]);
    for (std::size_t j = 0; j < cm.labels.size(); ++j) {
      out += ',';
      out += std::to_string(cm.counts[i][j]);
    }
    out += ',';
    out += std::to_string(cm.overflow[i]);
    out += '\n';
  }
  return out;
}

std::string confusion_svg(const ConfusionMatrix& cm) {
  const std::size_t n = cm.labels.size();
  const std::size_t cols = n + 1;  // + failed column
  const int cell = 52;
  const int left = 110;
  const int top = 96;
  const int width = left + cell * static_cast<int>(cols) + 16;
  const int height = top + cell * static_cast<int>(n) + 16;
  const auto norm = cm.row_normalized();

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "font-family=\"sans-serif\" font-size=\"11\">\n",
                width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto cell_color = [](double v) {
    // white -> steel blue ramp
    const int r = static_cast<int>(255 - v * (255 - 31));
    const int g = static_cast<int>(255 - v * (255 - 111));
    const int b = static_cast<int>(255 - v * (255 - 181));
    char c[16];
    std::snprintf(c, sizeof(c), "#%02x%02x%02x", r, g, b);
    return std::string(c);
  };

  for (std::size_t j = 0; j < cols; ++j) {
    const std::string name = j < n ? std::string(to_string(cm.labels[j])) : "failed";
    const int x = left + static_cast<int>(j) * cell + cell / 2;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" text-anchor=\"start\" "
                  "transform=\"rotate(-45 %d %d)\">%s</text>\n",
                  x, top - 8, x, top - 8, name.c_str());
    svg += buf;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int y = top + static_cast<int>(i) * cell + cell / 2 + 4;
    std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"%d\" text-anchor=\"end\">%s</text>\n",
                  left - 8, y, std::string(to_string(cm.labels[i])).c_str());
    svg += buf;
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = norm[i][j];
      const std::size_t count = j < n ? cm.counts[i][j] : cm.overflow[i];
      const int x = left + static_cast<int>(j) * cell;
      const int yy = top + static_cast<int>(i) * cell;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\" "
                    "stroke=\"#ccc\"/>\n",
                    x, yy, cell, cell, cell_color(v).c_str());
      svg += buf;
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\" fill=\"%s\">%zu</text>\n",
                    x + cell / 2, yy + cell / 2 + 4, v > 0.55 ? "white" : "#333", count);
      svg += buf;
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<const EvalReport*> rank_reports(std::span<const EvalReport> reports) {
  std::vector<const EvalReport*> ranked;
  ranked.reserve(reports.size());
  for (const EvalReport& r : reports) ranked.push_back(&r);
  std::stable_sort(ranked.begin(), ranked.end(), [](const EvalReport* a, const EvalReport* b) {
    if (a->overall_accuracy != b->overall_accuracy) {
      return a->overall_accuracy > b->overall_accuracy;
    }
    if (a->overall_macro_f1 != b->overall_macro_f1) {
      return a->overall_macro_f1 > b->overall_macro_f1;
    }
    return a->model < b->model;
  });
  return ranked;
}

std::string leaderboard_markdown(std::span<const EvalReport> reports) {
  if (reports.empty()) throw NoResults("no evaluation reports to rank");
  std::string out = "| Rank | Model | Overall Acc (%) | Overall F1 (%) | Records |\n";
  out += "|------|-------|-----------------|----------------|---------|\n";
  std::size_t rank = 1;
  for (const EvalReport* r : rank_reports(reports)) {
    out += "| " + std::to_string(rank++) + " | " + r->model + " | " + pct2(r->overall_accuracy) +
           " | " + pct2(r->overall_macro_f1) + " | " + std::to_string(r->record_count) + " |\n";
  }
  return out;
}

std::string leaderboard_json(std::span<const EvalReport> reports) {
  if (reports.empty()) throw NoResults("no evaluation reports to rank");
  ordered_json rows = ordered_json::array();
  std::size_t rank = 1;
  for (const EvalReport* r : rank_reports(reports)) {
    rows.push_back({{"rank", rank++},
                    {"model", r->model},
                    {"overall_accuracy", r->overall_accuracy},
                    {"overall_macro_f1", r->overall_macro_f1},
                    {"record_count", r->record_count}});
  }
  return rows.dump(2);
}

}  // namespace ferkit

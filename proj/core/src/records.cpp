#include "ferkit/records.hpp"

#include <algorithm>

#include "json.hpp"

#include "ferkit/errors.hpp"

namespace ferkit {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json parse_line(std::string_view line) {
  ordered_json doc = ordered_json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ParseError("record line is not a JSON object");
  }
  return doc;
}

std::string require_string(const ordered_json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) {
    throw ParseError(std::string("record missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

EmotionLabel require_label(const ordered_json& doc, const char* key) {
  const auto label = label_from_token(require_string(doc, key));
  if (!label) throw ParseError(std::string("record field '") + key + "' is not a label token");
  return *label;
}

DatasetId require_dataset(const ordered_json& doc) {
  const auto ds = dataset_from_token(require_string(doc, "dataset"));
  if (!ds) throw ParseError("record field 'dataset' is not a dataset token");
  return *ds;
}

ordered_json vqa_to_json(const VqaRecord& r) {
  ordered_json doc;
  doc["id"] = r.id;
  doc["dataset"] = std::string(to_string(r.dataset));
  doc["image"] = r.image;
  doc["question"] = r.question;
  ordered_json cands = ordered_json::array();
  for (EmotionLabel l : r.candidates) cands.push_back(std::string(to_string(l)));
  doc["candidates"] = std::move(cands);
  doc["label"] = std::string(to_string(r.label));
  return doc;
}

VqaRecord vqa_from_json(const ordered_json& doc) {
  VqaRecord r;
  r.id = require_string(doc, "id");
  r.dataset = require_dataset(doc);
  r.image = require_string(doc, "image");
  r.question = require_string(doc, "question");
  if (r.question.empty()) throw ParseError("record 'question' is empty");
  auto it = doc.find("candidates");
  if (it == doc.end() || !it->is_array() || it->empty()) {
    throw ParseError("record 'candidates' must be a non-empty array");
  }
  for (const auto& item : *it) {
    if (!item.is_string()) throw ParseError("record 'candidates' entries must be strings");
    const auto label = label_from_token(item.get<std::string>());
    if (!label) throw ParseError("record 'candidates' entry is not a label token");
    r.candidates.push_back(*label);
  }
  std::sort(r.candidates.begin(), r.candidates.end());
  r.candidates.erase(std::unique(r.candidates.begin(), r.candidates.end()), r.candidates.end());
  r.label = require_label(doc, "label");
  if (std::find(r.candidates.begin(), r.candidates.end(), r.label) == r.candidates.end()) {
    throw ParseError("record 'label' is outside its candidate set");
  }
  return r;
}

}  // namespace

std::string_view to_string(QcStatus status) {
  switch (status) {
    case QcStatus::pending: return "pending";
    case QcStatus::kept: return "kept";
    case QcStatus::rejected: return "rejected";
  }
  return "pending";
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::malformed_tags: return "malformed_tags";
    case RejectReason::answer_mismatch: return "answer_mismatch";
    case RejectReason::blur_mention: return "blur_mention";
  }
  return "malformed_tags";
}

std::optional<QcStatus> qc_status_from_token(std::string_view token) {
  if (token == "pending") return QcStatus::pending;
  if (token == "kept") return QcStatus::kept;
  if (token == "rejected") return QcStatus::rejected;
  return std::nullopt;
}

std::optional<RejectReason> reject_reason_from_token(std::string_view token) {
  if (token == "malformed_tags") return RejectReason::malformed_tags;
  if (token == "answer_mismatch") return RejectReason::answer_mismatch;
  if (token == "blur_mention") return RejectReason::blur_mention;
  return std::nullopt;
}

std::string_view to_string(ExtractionMethod method) {
  switch (method) {
    case ExtractionMethod::tagged: return "tagged";
    case ExtractionMethod::fallback: return "fallback";
    case ExtractionMethod::failed: return "failed";
  }
  return "failed";
}

std::optional<ExtractionMethod> extraction_method_from_token(std::string_view token) {
  if (token == "tagged") return ExtractionMethod::tagged;
  if (token == "fallback") return ExtractionMethod::fallback;
  if (token == "failed") return ExtractionMethod::failed;
  return std::nullopt;
}

std::string VqaRecord::to_jsonl_line() const { return vqa_to_json(*this).dump(); }

VqaRecord VqaRecord::from_jsonl_line(std::string_view line) {
  return vqa_from_json(parse_line(line));
}

std::string CotRecord::to_jsonl_line() const {
  ordered_json doc = vqa_to_json(vqa);
  doc["raw_output"] = raw_output;
  doc["trajectory"] = trajectory;
  doc["source_model"] = source_model;
  doc["qc_status"] = std::string(to_string(qc_status));
  if (reject_reason) doc["reject_reason"] = std::string(to_string(*reject_reason));
  return doc.dump();
}

CotRecord CotRecord::from_jsonl_line(std::string_view line) {
  const ordered_json doc = parse_line(line);
  CotRecord r;
  r.vqa = vqa_from_json(doc);
  r.raw_output = require_string(doc, "raw_output");
  r.trajectory = require_string(doc, "trajectory");
  r.source_model = require_string(doc, "source_model");
  const auto status = qc_status_from_token(require_string(doc, "qc_status"));
  if (!status) throw ParseError("record 'qc_status' is not a status token");
  r.qc_status = *status;
  if (auto it = doc.find("reject_reason"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError("record 'reject_reason' must be a string");
    const auto reason = reject_reason_from_token(it->get<std::string>());
    if (!reason) throw ParseError("record 'reject_reason' is not a reason token");
    r.reject_reason = reason;
  }
  if (r.qc_status == QcStatus::rejected && !r.reject_reason) {
    throw ParseError("rejected record lacks 'reject_reason'");
  }
  if (r.qc_status != QcStatus::rejected && r.reject_reason) {
    throw ParseError("non-rejected record carries 'reject_reason'");
  }
  return r;
}

std::string EvalRecord::to_jsonl_line() const {
  ordered_json doc;
  doc["id"] = id;
  doc["dataset"] = std::string(to_string(dataset));
  doc["model"] = model;
  doc["raw_response"] = raw_response;
  if (extracted_label) {
    doc["extracted_label"] = std::string(to_string(*extracted_label));
  } else {
    doc["extracted_label"] = nullptr;
  }
  doc["extraction_method"] = std::string(to_string(extraction_method));
  doc["gt"] = std::string(to_string(gt));
  doc["correct"] = correct;
  return doc.dump();
}

EvalRecord EvalRecord::from_jsonl_line(std::string_view line) {
  const ordered_json doc = parse_line(line);
  EvalRecord r;
  r.id = require_string(doc, "id");
  r.dataset = require_dataset(doc);
  r.model = require_string(doc, "model");
  r.raw_response = require_string(doc, "raw_response");
  if (auto it = doc.find("extracted_label"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError("record 'extracted_label' must be string or null");
    const auto label = label_from_token(it->get<std::string>());
    if (!label) throw ParseError("record 'extracted_label' is not a label token");
    r.extracted_label = label;
  }
  const auto method = extraction_method_from_token(require_string(doc, "extraction_method"));
  if (!method) throw ParseError("record 'extraction_method' is not a method token");
  r.extraction_method = *method;
  r.gt = require_label(doc, "gt");
  auto it = doc.find("correct");
  if (it == doc.end() || !it->is_boolean()) {
    throw ParseError("record missing boolean field 'correct'");
  }
  r.correct = it->get<bool>();
  if ((r.extraction_method == ExtractionMethod::failed) != !r.extracted_label) {
    throw ParseError("record extraction_method disagrees with extracted_label presence");
  }
  const bool expect_correct = r.extracted_label && *r.extracted_label == r.gt;
  if (r.correct != expect_correct) {
    throw ParseError("record 'correct' disagrees with extracted_label vs gt");
  }
  return r;
}

}  // namespace ferkit

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ferkit/labels.hpp"

namespace ferkit {

// One image/question/answer sample. `question` keeps the unrendered variant
// text (candidate-list slot included); candidates are substituted at prompt
// time so the same record evaluates under any label configuration.
struct VqaRecord {
  std::string id;
  DatasetId dataset = DatasetId::rafdb;
  std::string image;                     // relative path or opaque reference
  std::string question;
  std::vector<EmotionLabel> candidates;  // duplicate-free, canonical order
  EmotionLabel label = EmotionLabel::anger;

  bool operator==(const VqaRecord&) const = default;

  std::string to_jsonl_line() const;
  static VqaRecord from_jsonl_line(std::string_view line);
};

enum class QcStatus : std::uint8_t { pending, kept, rejected };

enum class RejectReason : std::uint8_t { malformed_tags, answer_mismatch, blur_mention };

std::string_view to_string(QcStatus status);
std::string_view to_string(RejectReason reason);
std::optional<QcStatus> qc_status_from_token(std::string_view token);
std::optional<RejectReason> reject_reason_from_token(std::string_view token);

// VqaRecord plus a synthesized reasoning trace. `raw_output` is the verbatim
// synthesis-model response and is what quality control re-checks;
// `trajectory` is the think-tag content, filled in once a record is kept.
struct CotRecord {
  VqaRecord vqa;
  std::string raw_output;
  std::string trajectory;
  std::string source_model;
  QcStatus qc_status = QcStatus::pending;
  std::optional<RejectReason> reject_reason;

  bool operator==(const CotRecord&) const = default;

  std::string to_jsonl_line() const;
  static CotRecord from_jsonl_line(std::string_view line);
};

enum class ExtractionMethod : std::uint8_t { tagged, fallback, failed };

std::string_view to_string(ExtractionMethod method);
std::optional<ExtractionMethod> extraction_method_from_token(std::string_view token);

// One scored model response.
struct EvalRecord {
  std::string id;
  DatasetId dataset = DatasetId::rafdb;
  std::string model;
  std::string raw_response;
  std::optional<EmotionLabel> extracted_label;
  ExtractionMethod extraction_method = ExtractionMethod::failed;
  EmotionLabel gt = EmotionLabel::anger;
  bool correct = false;

  bool operator==(const EvalRecord&) const = default;

  std::string to_jsonl_line() const;
  static EvalRecord from_jsonl_line(std::string_view line);
};

}  // namespace ferkit

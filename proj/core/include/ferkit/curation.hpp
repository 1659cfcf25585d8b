#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ferkit/client.hpp"
#include "ferkit/labels.hpp"
#include "ferkit/prompting.hpp"
#include "ferkit/records.hpp"

namespace ferkit {

// Facial-cue phrases per emotion, fed into the synthesis prompt. File form:
// "label: cue phrase" lines, one cue per line, '#' comments.
struct RuleTable {
  std::map<EmotionLabel, std::vector<std::string>> cues;

  static const RuleTable& builtin();
  static RuleTable parse(std::string_view text);
  static RuleTable from_file(const std::filesystem::path& path);
  std::string serialize() const;

  const std::vector<std::string>& cues_for(EmotionLabel label) const;
};

// Phrases whose presence in a trajectory marks the source image as unusable.
// Matching is case-insensitive substring.
struct BlurLexicon {
  std::vector<std::string> phrases;

  static const BlurLexicon& builtin();
  static BlurLexicon parse(std::string_view text);
  static BlurLexicon from_file(const std::filesystem::path& path);

  bool matches(std::string_view text) const;
};

struct QcReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t rejected_malformed_tags = 0;
  std::size_t rejected_answer_mismatch = 0;
  std::size_t rejected_blur_mention = 0;

  std::size_t rejected_total() const {
    return rejected_malformed_tags + rejected_answer_mismatch + rejected_blur_mention;
  }
  std::string to_json() const;
};

enum class LengthUnit : std::uint8_t { characters, whitespace_tokens };

std::string_view to_string(LengthUnit unit);

struct LengthStats {
  std::size_t total = 0;
  std::size_t min = 0;
  std::size_t max = 0;
  double mean = 0.0;
};

struct StatsReport {
  std::size_t total = 0;
  std::map<EmotionLabel, std::size_t> counts;
  std::map<EmotionLabel, double> percentages;  // 1 decimal, sums to ~100
  LengthStats question_length;
  LengthStats answer_length;
  LengthUnit unit = LengthUnit::characters;

  std::string to_json() const;
};

struct RewriteOptions {
  std::string model = "rewriter";
  std::size_t max_rounds = 8;       // re-request budget for duplicates/bad slots
  std::size_t batch_per_round = 0;  // 0 = ask for the full remaining count
  double temperature = 1.0;         // rewriting wants diversity, unlike evaluation
};

// Prompts the rewriting model for semantically equivalent variants of the
// seed until k distinct slot-bearing ones are collected. Duplicates (after
// whitespace normalization) and slotless lines are discarded and
// re-requested. Throws InsufficientVariants when the budget runs out.
QuestionPool rewrite_questions(const std::string& seed, std::size_t k, const ClientConfig& cfg,
                               const RewriteOptions& options = {},
                               const WireAdapter& adapter = default_adapter());

struct AssemblyPair {
  std::string image;
  EmotionLabel label = EmotionLabel::anger;
  DatasetId dataset = DatasetId::rafdb;
};

struct AssemblyResult {
  std::vector<VqaRecord> records;
  // (input index, message) for pairs whose label is outside the dataset's
  // candidate set; never fatal.
  std::vector<std::pair<std::size_t, std::string>> skipped;
};

// One record per pair, input order, deterministic under the seed.
AssemblyResult assemble_rlvr(std::span<const AssemblyPair> pairs, const QuestionPool& pool,
                             std::uint64_t rng_seed,
                             const LabelConfig& config = LabelConfig::defaults());

// Instruction sent to the synthesis model: ground-truth label, its cue
// phrases, and the tag protocol. Visible for tests and prompt audits.
std::string synthesis_instruction(const VqaRecord& record, const RuleTable& rules);

struct SynthesisOptions {
  std::string model = "synthesizer";
  // Image references are resolved relative to this root; records whose file
  // is missing are sent text-only unless require_images is set.
  std::filesystem::path images_root = ".";
  bool require_images = false;
};

// Asks the synthesis model to reason backward from the ground truth. Never
// drops records: whatever comes back is stored pending for QC.
CotRecord synthesize_trajectory(const VqaRecord& record, const RuleTable& rules,
                                const ClientConfig& cfg, const SynthesisOptions& options = {},
                                const WireAdapter& adapter = default_adapter());

// Batch variant over model-client's bounded fan-out. Item failures become
// pending records with empty output (QC rejects them later).
std::vector<CotRecord> synthesize_trajectories(std::span<const VqaRecord> records,
                                               const RuleTable& rules, const ClientConfig& cfg,
                                               const SynthesisOptions& options = {},
                                               const WireAdapter& adapter = default_adapter());

struct QcDecision {
  QcStatus status = QcStatus::pending;
  std::optional<RejectReason> reason;
};

// Priority order: malformed_tags, then answer_mismatch, then blur_mention.
// A record failing several rules reports only the first.
QcDecision qc_filter(const CotRecord& record, const BlurLexicon& blur = BlurLexicon::builtin());

// Applies qc_filter to every record in place: kept records get their
// trajectory extracted from the think tags, rejected ones keep it empty.
// Idempotent. kept + rejected = input.
QcReport filter_records(std::vector<CotRecord>& records,
                        const BlurLexicon& blur = BlurLexicon::builtin());

StatsReport dataset_stats(std::span<const VqaRecord> records, LengthUnit unit);
StatsReport dataset_stats(std::span<const CotRecord> records, LengthUnit unit);

enum class TextField : std::uint8_t { question, trajectory };

// Lowercased alpha-token counts, stop words removed, descending count with
// lexicographic tie-break.
std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    std::span<const std::string> texts, std::span<const std::string> stop_words = {});

std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    std::span<const CotRecord> records, TextField field,
    std::span<const std::string> stop_words = {});

std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    std::span<const VqaRecord> records, std::span<const std::string> stop_words = {});

const std::vector<std::string>& default_stop_words();

}  // namespace ferkit

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ferkit/labels.hpp"
#include "ferkit/records.hpp"

namespace ferkit {

// Placeholder that question templates must carry; rendering substitutes the
// candidate list for it.
inline constexpr std::string_view kCandidateSlot = "{candidates}";

// A hand-written seed question plus its rewritten variants. File form:
// line 1 "#seed: <text>", then one variant per line.
struct QuestionPool {
  std::string seed;
  std::vector<std::string> variants;
  std::size_t k = 0;  // requested pool size; |variants| <= k

  static QuestionPool from_file(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Seed-only pool, handy for tests and small runs.
  static QuestionPool seed_only(std::string seed_text);
};

struct PromptBundle {
  std::string system;
  std::string user;
  std::string image;  // content reference, resolved by the caller
};

// Fixed expert-role system prompt; includes the tag protocol instructions.
std::string render_system_prompt();

// Comma-separated candidate tokens in canonical order.
std::string render_candidate_list(std::span<const EmotionLabel> candidates);

// Substitutes the candidate list into the variant's slot.
// Throws MissingPlaceholder when the slot is absent.
std::string render_question(std::string_view variant, std::span<const EmotionLabel> candidates);

// Ready-to-send prompts for one record.
PromptBundle build_prompt_bundle(const VqaRecord& record);

// Samples one variant uniformly (seeded) and assembles the record with the
// dataset's candidate set. Throws LabelNotInCandidates.
VqaRecord build_vqa_record(std::string image, EmotionLabel label, DatasetId dataset,
                           const QuestionPool& pool, std::uint64_t rng_seed,
                           const LabelConfig& config = LabelConfig::defaults());

// Default seed question shipped with the toolkit. A reconstruction: the slot
// placement and wording are editable via the pool file.
std::string default_seed_question();

}  // namespace ferkit

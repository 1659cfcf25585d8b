#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "ferkit/labels.hpp"
#include "ferkit/records.hpp"

namespace ferkit {

struct ExtractionResult {
  std::optional<EmotionLabel> label;
  ExtractionMethod method = ExtractionMethod::failed;
  // Byte offsets of the text that resolved the label: the tag content for
  // tagged extraction, the matched word for fallback.
  std::optional<std::pair<std::size_t, std::size_t>> matched_span;
};

struct ExtractionOptions {
  const Lexicon* lexicon = nullptr;  // builtin when null
  // Off by default: "not happy" still matches happiness. When on, a fallback
  // mention is skipped if a negator appears within the preceding few words.
  bool negation_window = false;
};

// Content of the LAST well-formed <tag>...</tag> pair; absent when none.
std::optional<std::string_view> extract_tagged(std::string_view text, std::string_view tag_name);

// Byte offsets (content begin, content end) of the same pair.
std::optional<std::pair<std::size_t, std::size_t>> extract_tagged_span(std::string_view text,
                                                                       std::string_view tag_name);

// Tagged channel first; on failure, last word-boundary lexicon mention of a
// candidate anywhere in the text; otherwise failed. Total over byte strings.
ExtractionResult extract_answer(std::string_view text, std::span<const EmotionLabel> candidates,
                                const ExtractionOptions& options = {});

}  // namespace ferkit

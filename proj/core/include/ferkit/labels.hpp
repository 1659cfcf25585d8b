#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ferkit {

// Canonical 8-way emotion vocabulary. Enum order is the canonical order and
// the serialized tokens are the exact lowercase names.
enum class EmotionLabel : std::uint8_t {
  anger,
  contempt,
  disgust,
  fear,
  happiness,
  neutral,
  sadness,
  surprise,
};

inline constexpr std::size_t kLabelCount = 8;

inline constexpr std::array<EmotionLabel, kLabelCount> all_labels() {
  return {EmotionLabel::anger,   EmotionLabel::contempt, EmotionLabel::disgust,
          EmotionLabel::fear,    EmotionLabel::happiness, EmotionLabel::neutral,
          EmotionLabel::sadness, EmotionLabel::surprise};
}

std::string_view to_string(EmotionLabel label);

// Exact canonical token after trimming and lowercasing; no synonym mapping.
std::optional<EmotionLabel> label_from_token(std::string_view token);

enum class DatasetId : std::uint8_t {
  rafdb,
  ferplus,
  affectnet,
  sfew2,
};

inline constexpr std::array<DatasetId, 4> all_datasets() {
  return {DatasetId::rafdb, DatasetId::ferplus, DatasetId::affectnet, DatasetId::sfew2};
}

std::string_view to_string(DatasetId dataset);
std::optional<DatasetId> dataset_from_token(std::string_view token);

// Synonym table used by lenient label matching. Keys are single lowercase
// words; values are canonical labels. Canonical tokens always map to
// themselves. Stored on disk as "synonym = canonical" lines, '#' comments.
class Lexicon {
 public:
  static const Lexicon& builtin();
  static Lexicon parse(std::string_view text);
  static Lexicon from_file(const std::filesystem::path& path);

  void add(std::string synonym, EmotionLabel label);
  std::optional<EmotionLabel> lookup(std::string_view lowercase_word) const;
  const std::map<std::string, EmotionLabel, std::less<>>& entries() const { return entries_; }
  std::string serialize() const;

 private:
  std::map<std::string, EmotionLabel, std::less<>> entries_;
};

// Per-dataset candidate sets. Defaults: 8 classes for ferplus/affectnet,
// 7 classes (no contempt) for rafdb/sfew2. Stored as JSON
// {"rafdb": ["anger", ...], ...}; omitted datasets keep their default.
struct LabelConfig {
  std::map<DatasetId, std::vector<EmotionLabel>> sets;

  static LabelConfig defaults();
  static LabelConfig from_file(const std::filesystem::path& path);

  const std::vector<EmotionLabel>& set_for(DatasetId dataset) const;
};

// Candidate set under the default configuration.
const std::vector<EmotionLabel>& label_set(DatasetId dataset);

// One lexicon hit inside a scanned text. Offsets are byte positions of the
// matched word.
struct LabelMention {
  EmotionLabel label;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Word-boundary, case-insensitive scan for candidate labels and their
// synonyms, in text order.
std::vector<LabelMention> scan_label_mentions(std::string_view text,
                                              std::span<const EmotionLabel> candidates,
                                              const Lexicon& lexicon = Lexicon::builtin());

// Resolves raw text to a candidate label: trims, lowercases, applies the
// synonym table, and accepts only when exactly one distinct candidate is
// mentioned. Total; absence signals no match.
std::optional<EmotionLabel> parse_label(std::string_view raw,
                                        std::span<const EmotionLabel> candidates,
                                        const Lexicon& lexicon = Lexicon::builtin());

}  // namespace ferkit

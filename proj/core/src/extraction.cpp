#include "ferkit/extraction.hpp"

#include <array>
#include <cctype>
#include <string>

namespace ferkit {
namespace {

struct TagPair {
  std::size_t content_begin = 0;
  std::size_t content_end = 0;
};

// Greedy left-to-right scan for non-overlapping <tag>...</tag> pairs,
// matching each open tag to the next close tag. Equivalent to a non-greedy
// regex findall, which is the convention tag-reward checkers follow.
std::optional<TagPair> last_pair(std::string_view text, std::string_view tag_name) {
  const std::string open = "<" + std::string(tag_name) + ">";
  const std::string close = "</" + std::string(tag_name) + ">";
  std::optional<TagPair> last;
  std::size_t pos = 0;
  while (true) {
    const std::size_t o = text.find(open, pos);
    if (o == std::string_view::npos) break;
    const std::size_t c = text.find(close, o + open.size());
    if (c == std::string_view::npos) break;
    last = TagPair{o + open.size(), c};
    pos = c + close.size();
  }
  return last;
}

bool is_negator(std::string_view word) {
  static constexpr std::array<std::string_view, 11> kNegators = {
      "not", "no", "isn", "aren", "never", "don", "doesn", "wasn", "weren", "cannot", "without"};
  for (std::string_view n : kNegators) {
    if (word == n) return true;
  }
  return false;
}

// True when a negator word ends within the few words just before `begin`.
bool negated_before(std::string_view text, std::size_t begin) {
  constexpr std::size_t kWindowChars = 24;
  const std::size_t from = begin > kWindowChars ? begin - kWindowChars : 0;
  std::size_t i = from;
  std::string word;
  bool negated = false;
  while (i < begin) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    word.clear();
    while (i < begin && std::isalpha(static_cast<unsigned char>(text[i]))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
      ++i;
    }
    negated = is_negator(word);  // only the nearest preceding words matter
  }
  return negated;
}

}  // namespace

std::optional<std::string_view> extract_tagged(std::string_view text, std::string_view tag_name) {
  const auto pair = last_pair(text, tag_name);
  if (!pair) return std::nullopt;
  return text.substr(pair->content_begin, pair->content_end - pair->content_begin);
}

std::optional<std::pair<std::size_t, std::size_t>> extract_tagged_span(std::string_view text,
                                                                       std::string_view tag_name) {
  const auto pair = last_pair(text, tag_name);
  if (!pair) return std::nullopt;
  return std::make_pair(pair->content_begin, pair->content_end);
}

ExtractionResult extract_answer(std::string_view text, std::span<const EmotionLabel> candidates,
                                const ExtractionOptions& options) {
  const Lexicon& lexicon = options.lexicon ? *options.lexicon : Lexicon::builtin();
  ExtractionResult result;

  if (const auto span = extract_tagged_span(text, "answer")) {
    const std::string_view content = text.substr(span->first, span->second - span->first);
    if (const auto label = parse_label(content, candidates, lexicon)) {
      result.label = label;
      result.method = ExtractionMethod::tagged;
      result.matched_span = *span;
      return result;
    }
  }

  const auto mentions = scan_label_mentions(text, candidates, lexicon);
  for (auto it = mentions.rbegin(); it != mentions.rend(); ++it) {
    if (options.negation_window && negated_before(text, it->begin)) continue;
    result.label = it->label;
    result.method = ExtractionMethod::fallback;
    result.matched_span = std::make_pair(it->begin, it->end);
    return result;
  }

  return result;  // failed
}

}  // namespace ferkit

#include "ferkit/labels.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ferkit/errors.hpp"

namespace ferkit {
namespace {

constexpr std::array<std::string_view, kLabelCount> kLabelTokens = {
    "anger", "contempt", "disgust", "fear", "happiness", "neutral", "sadness", "surprise"};

constexpr std::array<std::string_view, 4> kDatasetTokens = {"rafdb", "ferplus", "affectnet", "sfew2"};

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_word_char(unsigned char c) { return std::isalpha(c) != 0; }

}  // namespace

std::string_view to_string(EmotionLabel label) {
  return kLabelTokens[static_cast<std::size_t>(label)];
}

std::optional<EmotionLabel> label_from_token(std::string_view token) {
  const std::string t = lowercase(trim(token));
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (t == kLabelTokens[i]) return static_cast<EmotionLabel>(i);
  }
  return std::nullopt;
}

std::string_view to_string(DatasetId dataset) {
  return kDatasetTokens[static_cast<std::size_t>(dataset)];
}

std::optional<DatasetId> dataset_from_token(std::string_view token) {
  const std::string t = lowercase(trim(token));
  for (std::size_t i = 0; i < kDatasetTokens.size(); ++i) {
    if (t == kDatasetTokens[i]) return static_cast<DatasetId>(i);
  }
  return std::nullopt;
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon instance = [] {
    Lexicon lex;
    for (EmotionLabel l : all_labels()) lex.add(std::string(to_string(l)), l);
    lex.add("angry", EmotionLabel::anger);
    lex.add("mad", EmotionLabel::anger);
    lex.add("furious", EmotionLabel::anger);
    lex.add("rage", EmotionLabel::anger);
    lex.add("contemptuous", EmotionLabel::contempt);
    lex.add("scornful", EmotionLabel::contempt);
    lex.add("disdain", EmotionLabel::contempt);
    lex.add("disdainful", EmotionLabel::contempt);
    lex.add("disgusted", EmotionLabel::disgust);
    lex.add("repulsed", EmotionLabel::disgust);
    lex.add("revulsion", EmotionLabel::disgust);
    lex.add("afraid", EmotionLabel::fear);
    lex.add("scared", EmotionLabel::fear);
    lex.add("fearful", EmotionLabel::fear);
    lex.add("frightened", EmotionLabel::fear);
    lex.add("terrified", EmotionLabel::fear);
    lex.add("happy", EmotionLabel::happiness);
    lex.add("joy", EmotionLabel::happiness);
    lex.add("joyful", EmotionLabel::happiness);
    lex.add("cheerful", EmotionLabel::happiness);
    lex.add("delighted", EmotionLabel::happiness);
    lex.add("calm", EmotionLabel::neutral);
    lex.add("expressionless", EmotionLabel::neutral);
    lex.add("sad", EmotionLabel::sadness);
    lex.add("sorrow", EmotionLabel::sadness);
    lex.add("sorrowful", EmotionLabel::sadness);
    lex.add("unhappy", EmotionLabel::sadness);
    lex.add("surprised", EmotionLabel::surprise);
    lex.add("astonished", EmotionLabel::surprise);
    lex.add("amazed", EmotionLabel::surprise);
    lex.add("shocked", EmotionLabel::surprise);
    return lex;
  }();
  return instance;
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(text.substr(pos, eol - pos));
    ++line_no;
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("lexicon line " + std::to_string(line_no) + ": expected 'synonym = canonical'");
    }
    const std::string synonym = lowercase(trim(line.substr(0, eq)));
    const auto label = label_from_token(trim(line.substr(eq + 1)));
    if (synonym.empty() || !label) {
      throw ParseError("lexicon line " + std::to_string(line_no) + ": bad entry");
    }
    lex.add(synonym, *label);
  }
  return lex;
}

Lexicon Lexicon::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Lexicon::add(std::string synonym, EmotionLabel label) {
  entries_[lowercase(trim(synonym))] = label;
}

std::optional<EmotionLabel> Lexicon::lookup(std::string_view lowercase_word) const {
  auto it = entries_.find(lowercase_word);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Lexicon::serialize() const {
  std::string out;
  for (const auto& [synonym, label] : entries_) {
    out += synonym;
    out += " = ";
    out += to_string(label);
    out += '\n';
  }
  return out;
}

LabelConfig LabelConfig::defaults() {
  constexpr std::array<EmotionLabel, kLabelCount> all = all_labels();
  const std::vector<EmotionLabel> eight(all.begin(), all.end());
  std::vector<EmotionLabel> seven;
  for (EmotionLabel l : all) {
    if (l != EmotionLabel::contempt) seven.push_back(l);
  }
  LabelConfig cfg;
  cfg.sets[DatasetId::rafdb] = seven;
  cfg.sets[DatasetId::ferplus] = eight;
  cfg.sets[DatasetId::affectnet] = eight;
  cfg.sets[DatasetId::sfew2] = seven;
  return cfg;
}

LabelConfig LabelConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open label config: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError("label config " + path.string() + ": " + ex.what());
  }
  LabelConfig cfg = defaults();
  if (!doc.is_object()) throw ParseError("label config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto dataset = dataset_from_token(key);
    if (!dataset) throw ParseError("label config: unknown dataset '" + key + "'");
    if (!value.is_array() || value.empty()) {
      throw ParseError("label config: '" + key + "' must be a non-empty array");
    }
    std::vector<EmotionLabel> labels;
    for (const auto& item : value) {
      const auto label = label_from_token(item.get<std::string>());
      if (!label) throw ParseError("label config: unknown label in '" + key + "'");
      labels.push_back(*label);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    cfg.sets[*dataset] = std::move(labels);
  }
  return cfg;
}

const std::vector<EmotionLabel>& LabelConfig::set_for(DatasetId dataset) const {
  auto it = sets.find(dataset);
  if (it == sets.end()) {
    static const LabelConfig fallback = defaults();
    return fallback.sets.at(dataset);
  }
  return it->second;
}

const std::vector<EmotionLabel>& label_set(DatasetId dataset) {
  static const LabelConfig cfg = LabelConfig::defaults();
  return cfg.set_for(dataset);
}

std::vector<LabelMention> scan_label_mentions(std::string_view text,
                                              std::span<const EmotionLabel> candidates,
                                              const Lexicon& lexicon) {
  std::vector<LabelMention> mentions;
  std::array<bool, kLabelCount> wanted{};
  for (EmotionLabel l : candidates) wanted[static_cast<std::size_t>(l)] = true;

  std::size_t i = 0;
  std::string word;
  while (i < text.size()) {
    if (!is_word_char(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    word.clear();
    while (i < text.size() && is_word_char(static_cast<unsigned char>(text[i]))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
      ++i;
    }
    if (auto label = lexicon.lookup(word)) {
      if (wanted[static_cast<std::size_t>(*label)]) {
        mentions.push_back({*label, begin, i});
      }
    }
  }
  return mentions;
}

std::optional<EmotionLabel> parse_label(std::string_view raw,
                                        std::span<const EmotionLabel> candidates,
                                        const Lexicon& lexicon) {
  const auto mentions = scan_label_mentions(raw, candidates, lexicon);
  if (mentions.empty()) return std::nullopt;
  const EmotionLabel first = mentions.front().label;
  for (const LabelMention& m : mentions) {
    if (m.label != first) return std::nullopt;  // ambiguous
  }
  return first;
}

}  // namespace ferkit

#include "ferkit/curation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "ferkit/errors.hpp"
#include "ferkit/extraction.hpp"
#include "ferkit/jsonl.hpp"
#include "ferkit/rng.hpp"

namespace ferkit {
namespace {

using ordered_json = nlohmann::ordered_json;

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

// Whitespace runs collapsed to single spaces; the dedup key for variants.
std::string normalize_ws(std::string_view s) {
  std::string out;
  bool in_space = true;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Strips list furniture the rewriting model tends to prepend: numbering,
// bullets, surrounding quotes.
std::string strip_list_prefix(std::string_view line) {
  std::string_view s = trim(line);
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
    s = trim(s.substr(i + 1));
  } else {
    s = trim(s);
  }
  while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '>')) {
    s = trim(s.substr(1));
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::size_t count_slot(std::string_view text) {
  std::size_t n = 0, pos = 0;
  while ((pos = text.find(kCandidateSlot, pos)) != std::string_view::npos) {
    ++n;
    pos += kCandidateSlot.size();
  }
  return n;
}

std::size_t text_length(std::string_view text, LengthUnit unit) {
  if (unit == LengthUnit::characters) return text.size();
  std::size_t tokens = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_token) ++tokens;
    in_token = !space;
  }
  return tokens;
}

LengthStats length_stats(const std::vector<std::size_t>& lengths) {
  LengthStats stats;
  if (lengths.empty()) return stats;
  stats.min = lengths.front();
  stats.max = lengths.front();
  for (std::size_t len : lengths) {
    stats.total += len;
    stats.min = std::min(stats.min, len);
    stats.max = std::max(stats.max, len);
  }
  stats.mean = static_cast<double>(stats.total) / static_cast<double>(lengths.size());
  return stats;
}

ordered_json length_stats_json(const LengthStats& s) {
  return {{"total", s.total}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}};
}

StatsReport stats_from_parts(const std::vector<EmotionLabel>& labels,
                             const std::vector<std::size_t>& question_lengths,
                             const std::vector<std::size_t>& answer_lengths, LengthUnit unit) {
  if (labels.empty()) throw EmptyInput("stats over zero records");
  StatsReport report;
  report.total = labels.size();
  report.unit = unit;
  for (EmotionLabel l : labels) ++report.counts[l];
  for (const auto& [label, count] : report.counts) {
    const double pct = 100.0 * static_cast<double>(count) / static_cast<double>(report.total);
    report.percentages[label] = std::round(pct * 10.0) / 10.0;
  }
  report.question_length = length_stats(question_lengths);
  report.answer_length = length_stats(answer_lengths);
  return report;
}

// Think-tag content when the output opens with one; what QC's blur rule and
// kept-record trajectories use.
std::optional<std::string_view> leading_think_content(std::string_view raw) {
  const std::string_view open = "<think>";
  const std::string_view close = "</think>";
  const std::string_view lt = trim(raw);
  if (lt.rfind(open, 0) != 0) return std::nullopt;
  const std::size_t end = lt.find(close, open.size());
  if (end == std::string_view::npos) return std::nullopt;
  return lt.substr(open.size(), end - open.size());
}

}  // namespace

const RuleTable& RuleTable::builtin() {
  static const RuleTable instance = [] {
    RuleTable t;
    t.cues[EmotionLabel::anger] = {"frowning", "wide-open eyes",
                                   "mouth corners pulled downward"};
    t.cues[EmotionLabel::contempt] = {"one lip corner raised", "asymmetric slight smirk",
                                      "narrowed gaze"};
    t.cues[EmotionLabel::disgust] = {"wrinkled nose", "raised upper lip", "narrowed eyes"};
    t.cues[EmotionLabel::fear] = {"eyebrows raised and drawn together", "widened eyes",
                                  "lips stretched horizontally"};
    t.cues[EmotionLabel::happiness] = {"raised lip corners", "visible smile",
                                       "creases around the eyes"};
    t.cues[EmotionLabel::neutral] = {"relaxed facial muscles", "level eyebrows",
                                     "closed and even mouth"};
    t.cues[EmotionLabel::sadness] = {"inner eyebrow corners raised", "downturned mouth corners",
                                     "drooping eyelids"};
    t.cues[EmotionLabel::surprise] = {"raised eyebrows", "wide-open eyes", "dropped jaw"};
    return t;
  }();
  return instance;
}

RuleTable RuleTable::parse(std::string_view text) {
  RuleTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(text.substr(pos, eol - pos));
    ++line_no;
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("rule table line " + std::to_string(line_no) + ": expected 'label: cue'");
    }
    const auto label = label_from_token(line.substr(0, colon));
    const std::string cue(trim(line.substr(colon + 1)));
    if (!label || cue.empty()) {
      throw ParseError("rule table line " + std::to_string(line_no) + ": bad entry");
    }
    table.cues[*label].push_back(cue);
  }
  for (EmotionLabel l : all_labels()) {
    if (table.cues.find(l) == table.cues.end()) {
      throw ParseError("rule table lacks cues for '" + std::string(to_string(l)) + "'");
    }
  }
  return table;
}

RuleTable RuleTable::from_file(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

std::string RuleTable::serialize() const {
  std::string out;
  for (const auto& [label, phrases] : cues) {
    for (const std::string& cue : phrases) {
      out += to_string(label);
      out += ": ";
      out += cue;
      out += '\n';
    }
  }
  return out;
}

const std::vector<std::string>& RuleTable::cues_for(EmotionLabel label) const {
  static const std::vector<std::string> empty;
  auto it = cues.find(label);
  return it == cues.end() ? empty : it->second;
}

const BlurLexicon& BlurLexicon::builtin() {
  static const BlurLexicon instance{
      {"too blurry", "low resolution", "cannot discern", "image quality is too"}};
  return instance;
}

BlurLexicon BlurLexicon::parse(std::string_view text) {
  BlurLexicon lex;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    lex.phrases.push_back(lowercase(line));
  }
  return lex;
}

BlurLexicon BlurLexicon::from_file(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

bool BlurLexicon::matches(std::string_view text) const {
  const std::string hay = lowercase(text);
  for (const std::string& phrase : phrases) {
    if (!phrase.empty() && hay.find(phrase) != std::string::npos) return true;
  }
  return false;
}

std::string QcReport::to_json() const {
  ordered_json doc;
  doc["input"] = input;
  doc["kept"] = kept;
  doc["rejected"] = {{"malformed_tags", rejected_malformed_tags},
                     {"answer_mismatch", rejected_answer_mismatch},
                     {"blur_mention", rejected_blur_mention}};
  return doc.dump(2);
}

std::string_view to_string(LengthUnit unit) {
  return unit == LengthUnit::characters ? "characters" : "whitespace_tokens";
}

std::string StatsReport::to_json() const {
  ordered_json doc;
  doc["total"] = total;
  ordered_json emotions;
  for (const auto& [label, count] : counts) {
    emotions[std::string(to_string(label))] = {{"count", count},
                                               {"percent", percentages.at(label)}};
  }
  doc["emotions"] = std::move(emotions);
  doc["question_length"] = length_stats_json(question_length);
  doc["answer_length"] = length_stats_json(answer_length);
  doc["unit"] = std::string(to_string(unit));
  return doc.dump(2);
}

QuestionPool rewrite_questions(const std::string& seed, std::size_t k, const ClientConfig& cfg,
                               const RewriteOptions& options, const WireAdapter& adapter) {
  if (k < 1) throw EmptyInput("requested variant count is zero");
  if (count_slot(seed) == 0) {
    throw MissingPlaceholder("seed question lacks the " + std::string(kCandidateSlot) + " slot");
  }

  QuestionPool pool;
  pool.seed = seed;
  pool.k = k;
  std::unordered_set<std::string> keys;
  keys.insert(normalize_ws(seed));  // a rewrite that echoes the seed adds nothing

  for (std::size_t round = 0; round < options.max_rounds && pool.variants.size() < k; ++round) {
    std::size_t need = k - pool.variants.size();
    if (options.batch_per_round) need = std::min(need, options.batch_per_round);

    std::string user = "Rewrite the following question into " + std::to_string(need) +
                       " semantically equivalent but syntactically diverse variants.\n"
                       "Question: " + seed + "\n"
                       "Rules: reply with exactly one variant per line and nothing else; every "
                       "variant must contain the literal placeholder " +
                       std::string(kCandidateSlot) + " exactly once.\n";
    if (!pool.variants.empty()) {
      user += "Do not repeat any of these existing variants:\n";
      for (const std::string& v : pool.variants) {
        user += "- " + v + "\n";
      }
    }
    user += "Batch " + std::to_string(round + 1) + ".";

    ChatRequest req;
    req.model = options.model;
    req.system = "You rewrite questions. Output only the rewritten questions, one per line.";
    req.user = user;
    req.temperature = options.temperature;
    const ModelResponse resp = complete(req, cfg, adapter);

    std::size_t pos = 0;
    const std::string& text = resp.text;
    while (pos <= text.size() && pool.variants.size() < k) {
      const std::size_t eol = std::min(text.find('\n', pos), text.size());
      const std::string variant = strip_list_prefix(std::string_view(text).substr(pos, eol - pos));
      pos = eol + 1;
      if (variant.empty() || count_slot(variant) != 1) continue;
      if (!keys.insert(normalize_ws(variant)).second) continue;
      pool.variants.push_back(variant);
    }
  }

  if (pool.variants.size() < k) {
    throw InsufficientVariants("collected " + std::to_string(pool.variants.size()) + " of " +
                               std::to_string(k) + " distinct variants");
  }
  return pool;
}

AssemblyResult assemble_rlvr(std::span<const AssemblyPair> pairs, const QuestionPool& pool,
                             std::uint64_t rng_seed, const LabelConfig& config) {
  AssemblyResult result;
  result.records.reserve(pairs.size());
  std::unordered_map<std::string, std::size_t> seen_ids;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const AssemblyPair& p = pairs[i];
    const std::uint64_t item_seed = splitmix64(rng_seed) ^ (0x9e3779b97f4a7c15ULL * (i + 1));
    try {
      VqaRecord record =
          build_vqa_record(p.image, p.label, p.dataset, pool, item_seed, config);
      const std::size_t dup = seen_ids[record.id]++;
      if (dup > 0) record.id += "#" + std::to_string(dup);
      result.records.push_back(std::move(record));
    } catch (const LabelNotInCandidates& ex) {
      result.skipped.emplace_back(i, ex.what());
    }
  }
  return result;
}

std::string synthesis_instruction(const VqaRecord& record, const RuleTable& rules) {
  const std::string label(to_string(record.label));
  std::string cues;
  const std::vector<std::string>& phrases = rules.cues_for(record.label);
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (i) cues += "; ";
    cues += phrases[i];
  }
  std::string out = "The person in this image shows " + label + ".";
  if (!cues.empty()) {
    out += " Typical facial cues for " + label + " include: " + cues + ".";
  }
  out += " Reason backward from that conclusion: describe the observable facial features step by "
         "step inside <think></think> tags, starting your reply with <think>, then give the final "
         "answer inside <answer></answer> tags. The answer must be exactly \"" +
         label + "\". Never mention that the label was given to you.";
  return out;
}

CotRecord synthesize_trajectory(const VqaRecord& record, const RuleTable& rules,
                                const ClientConfig& cfg, const SynthesisOptions& options,
                                const WireAdapter& adapter) {
  ChatRequest req;
  req.model = options.model;
  req.system =
      "You write chain-of-thought training data for facial expression recognition. Follow the "
      "requested format exactly.";
  req.user = synthesis_instruction(record, rules);
  if (auto bytes = try_read_file(options.images_root / record.image)) {
    req.image = std::move(*bytes);
  } else if (options.require_images) {
    throw Error("image not found under root: " + record.image);
  }
  const ModelResponse resp = complete(req, cfg, adapter);

  CotRecord cot;
  cot.vqa = record;
  cot.raw_output = resp.text;
  cot.source_model = options.model;
  cot.qc_status = QcStatus::pending;
  return cot;
}

std::vector<CotRecord> synthesize_trajectories(std::span<const VqaRecord> records,
                                               const RuleTable& rules, const ClientConfig& cfg,
                                               const SynthesisOptions& options,
                                               const WireAdapter& adapter) {
  std::vector<ChatRequest> reqs;
  reqs.reserve(records.size());
  for (const VqaRecord& r : records) {
    ChatRequest req;
    req.model = options.model;
    req.system =
        "You write chain-of-thought training data for facial expression recognition. Follow the "
        "requested format exactly.";
    req.user = synthesis_instruction(r, rules);
    if (auto bytes = try_read_file(options.images_root / r.image)) {
      req.image = std::move(*bytes);
    } else if (options.require_images) {
      throw Error("image not found under root: " + r.image);
    }
    reqs.push_back(std::move(req));
  }
  const std::vector<BatchItem> items = batch_complete(reqs, cfg, adapter);

  std::vector<CotRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CotRecord cot;
    cot.vqa = records[i];
    cot.raw_output = items[i].ok() ? items[i].response.text : std::string();
    cot.source_model = options.model;
    cot.qc_status = QcStatus::pending;
    out.push_back(std::move(cot));
  }
  return out;
}

QcDecision qc_filter(const CotRecord& record, const BlurLexicon& blur) {
  const auto think = leading_think_content(record.raw_output);
  if (!think) {
    return {QcStatus::rejected, RejectReason::malformed_tags};
  }
  const auto answer = extract_tagged(record.raw_output, "answer");
  if (!answer || parse_label(*answer, record.vqa.candidates) != record.vqa.label) {
    return {QcStatus::rejected, RejectReason::answer_mismatch};
  }
  if (blur.matches(*think)) {
    return {QcStatus::rejected, RejectReason::blur_mention};
  }
  return {QcStatus::kept, std::nullopt};
}

QcReport filter_records(std::vector<CotRecord>& records, const BlurLexicon& blur) {
  QcReport report;
  report.input = records.size();
  for (CotRecord& record : records) {
    const QcDecision decision = qc_filter(record, blur);
    record.qc_status = decision.status;
    record.reject_reason = decision.reason;
    if (decision.status == QcStatus::kept) {
      record.trajectory = std::string(*leading_think_content(record.raw_output));
      ++report.kept;
    } else {
      record.trajectory.clear();
      switch (*decision.reason) {
        case RejectReason::malformed_tags: ++report.rejected_malformed_tags; break;
        case RejectReason::answer_mismatch: ++report.rejected_answer_mismatch; break;
        case RejectReason::blur_mention: ++report.rejected_blur_mention; break;
      }
    }
  }
  return report;
}

StatsReport dataset_stats(std::span<const VqaRecord> records, LengthUnit unit) {
  std::vector<EmotionLabel> labels;
  std::vector<std::size_t> questions, answers;
  for (const VqaRecord& r : records) {
    labels.push_back(r.label);
    questions.push_back(text_length(r.question, unit));
    answers.push_back(text_length(to_string(r.label), unit));
  }
  return stats_from_parts(labels, questions, answers, unit);
}

StatsReport dataset_stats(std::span<const CotRecord> records, LengthUnit unit) {
  std::vector<EmotionLabel> labels;
  std::vector<std::size_t> questions, answers;
  for (const CotRecord& r : records) {
    labels.push_back(r.vqa.label);
    questions.push_back(text_length(r.vqa.question, unit));
    answers.push_back(text_length(r.raw_output, unit));
  }
  return stats_from_parts(labels, questions, answers, unit);
}

std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    std::span<const std::string> texts, std::span<const std::string> stop_words) {
  if (texts.empty()) throw EmptyInput("word frequencies over zero texts");
  std::unordered_set<std::string> stops(stop_words.begin(), stop_words.end());
  std::unordered_map<std::string, std::size_t> counts;
  std::string word;
  for (const std::string& text : texts) {
    std::size_t i = 0;
    while (i < text.size()) {
      if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
        ++i;
        continue;
      }
      word.clear();
      while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
        ++i;
      }
      if (!stops.count(word)) ++counts[word];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    std::span<const CotRecord> records, TextField field,
    std::span<const std::string> stop_words) {
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const CotRecord& r : records) {
    texts.push_back(field == TextField::question ? r.vqa.question : r.trajectory);
  }
  return word_frequencies(texts, stop_words);
}

std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    std::span<const VqaRecord> records, std::span<const std::string> stop_words) {
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const VqaRecord& r : records) texts.push_back(r.question);
  return word_frequencies(texts, stop_words);
}

const std::vector<std::string>& default_stop_words() {
  static const std::vector<std::string> words = {
      "a",    "an",  "and",  "are", "as",   "at",   "be",   "by",   "for", "from",
      "has",  "have", "in",  "is",  "it",   "its",  "of",   "on",   "or",  "that",
      "the",  "their", "then", "this", "to", "was",  "were", "will", "with", "which"};
  return words;
}

}  // namespace ferkit

#include "ferkit/prompting.hpp"

#include <utility>

#include "ferkit/errors.hpp"
#include "ferkit/jsonl.hpp"
#include "ferkit/rng.hpp"

namespace ferkit {
namespace {

constexpr std::string_view kSeedPrefix = "#seed: ";

// Sampling domain: the rewritten pool; the seed stands in only while the
// pool is empty.
const std::vector<std::string>& sampling_domain(const QuestionPool& pool,
                                                std::vector<std::string>& seed_holder) {
  if (!pool.variants.empty()) return pool.variants;
  seed_holder.assign(1, pool.seed);
  return seed_holder;
}

}  // namespace

QuestionPool QuestionPool::from_file(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines.front().rfind(kSeedPrefix, 0) != 0) {
    throw ParseError("question pool must start with '#seed: <text>': " + path.string());
  }
  QuestionPool pool;
  pool.seed = lines.front().substr(kSeedPrefix.size());
  if (pool.seed.empty()) throw ParseError("question pool seed is empty: " + path.string());
  for (std::size_t i = 1; i < lines.size(); ++i) pool.variants.push_back(lines[i]);
  pool.k = pool.variants.size();
  return pool;
}

void QuestionPool::save(const std::filesystem::path& path) const {
  std::string body(kSeedPrefix);
  body += seed;
  body += '\n';
  for (const std::string& v : variants) {
    body += v;
    body += '\n';
  }
  atomic_write_file(path, body);
}

QuestionPool QuestionPool::seed_only(std::string seed_text) {
  QuestionPool pool;
  pool.seed = std::move(seed_text);
  pool.k = 1;
  return pool;
}

std::string render_system_prompt() {
  return "You are an expert in facial expression recognition. Examine the person's facial "
         "features in the image carefully and reason step by step inside <think></think> tags. "
         "Then state your final answer inside <answer></answer> tags, using exactly one of the "
         "candidate expressions given in the question and nothing else.";
}

std::string render_candidate_list(std::span<const EmotionLabel> candidates) {
  std::string out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i) out += ", ";
    out += to_string(candidates[i]);
  }
  return out;
}

std::string render_question(std::string_view variant, std::span<const EmotionLabel> candidates) {
  if (candidates.empty()) throw EmptyInput("candidate set is empty");
  const std::string list = render_candidate_list(candidates);
  std::string out;
  std::size_t pos = 0;
  bool found = false;
  while (true) {
    const std::size_t hit = variant.find(kCandidateSlot, pos);
    if (hit == std::string_view::npos) break;
    found = true;
    out.append(variant.substr(pos, hit - pos));
    out += list;
    pos = hit + kCandidateSlot.size();
  }
  if (!found) {
    throw MissingPlaceholder("question variant lacks the " + std::string(kCandidateSlot) +
                             " slot: " + std::string(variant));
  }
  out.append(variant.substr(pos));
  return out;
}

PromptBundle build_prompt_bundle(const VqaRecord& record) {
  PromptBundle bundle;
  bundle.system = render_system_prompt();
  bundle.user = render_question(record.question, record.candidates);
  bundle.image = record.image;
  return bundle;
}

VqaRecord build_vqa_record(std::string image, EmotionLabel label, DatasetId dataset,
                           const QuestionPool& pool, std::uint64_t rng_seed,
                           const LabelConfig& config) {
  const std::vector<EmotionLabel>& candidates = config.set_for(dataset);
  bool in_set = false;
  for (EmotionLabel l : candidates) in_set = in_set || l == label;
  if (!in_set) {
    throw LabelNotInCandidates(std::string(to_string(label)) + " is not a candidate for " +
                               std::string(to_string(dataset)));
  }
  std::vector<std::string> seed_holder;
  const std::vector<std::string>& domain = sampling_domain(pool, seed_holder);
  Rng rng(rng_seed);
  VqaRecord record;
  record.question = domain[rng.uniform_index(domain.size())];
  record.id = std::string(to_string(dataset)) + ":" + image;
  record.dataset = dataset;
  record.image = std::move(image);
  record.candidates = candidates;
  record.label = label;
  return record;
}

std::string default_seed_question() {
  return "What is the facial expression of the person in this image? "
         "Choose exactly one answer from the following options: {candidates}.";
}

}  // namespace ferkit

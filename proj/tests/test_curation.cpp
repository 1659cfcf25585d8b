#include <atomic>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "ferkit/curation.hpp"
#include "ferkit/errors.hpp"
#include "mock_server.hpp"
#include "tmp_dir.hpp"

using namespace ferkit;
using test::chat_body;
using test::MockServer;

namespace {

ClientConfig fast_config(const MockServer& server) {
  ClientConfig cfg;
  cfg.endpoint = server.endpoint();
  cfg.backoff_base_ms = 1;
  cfg.timeout_sec = 10;
  return cfg;
}

VqaRecord happiness_record() {
  VqaRecord r;
  r.id = "ferplus:h.png";
  r.dataset = DatasetId::ferplus;
  r.image = "h.png";
  r.question = "Which of {candidates}?";
  r.candidates = label_set(DatasetId::ferplus);
  r.label = EmotionLabel::happiness;
  return r;
}

CotRecord cot_with(std::string raw, EmotionLabel gt = EmotionLabel::happiness) {
  CotRecord c;
  c.vqa = happiness_record();
  c.vqa.label = gt;
  c.raw_output = std::move(raw);
  return c;
}

}  // namespace

TEST_CASE("builtin rule table covers every label with concrete cues") {
  const RuleTable& rules = RuleTable::builtin();
  for (EmotionLabel l : all_labels()) {
    CHECK_FALSE(rules.cues_for(l).empty());
  }
  const auto& anger = rules.cues_for(EmotionLabel::anger);
  REQUIRE(anger.size() == 3);
  CHECK(anger[0] == "frowning");
  CHECK(anger[1] == "wide-open eyes");
  CHECK(anger[2] == "mouth corners pulled downward");
}

TEST_CASE("rule table serialize round-trips") {
  const RuleTable& rules = RuleTable::builtin();
  const RuleTable back = RuleTable::parse(rules.serialize());
  CHECK(back.cues == rules.cues);
}

TEST_CASE("rule table parse validates lines and coverage") {
  CHECK_THROWS_AS(RuleTable::parse("anger frowning\n"), ParseError);
  CHECK_THROWS_AS(RuleTable::parse("anger: frowning\n"), ParseError);  // other labels missing
  CHECK_THROWS_AS(RuleTable::parse("mystery: something\n"), ParseError);

  // Comments and blanks are fine as long as coverage holds.
  std::string text = "# cue table\n\n";
  for (EmotionLabel l : all_labels()) {
    text += std::string(to_string(l)) + ": some cue\n";
  }
  const RuleTable t = RuleTable::parse(text);
  CHECK(t.cues_for(EmotionLabel::fear) == std::vector<std::string>{"some cue"});
}

TEST_CASE("blur lexicon matches case-insensitive substrings") {
  const BlurLexicon& blur = BlurLexicon::builtin();
  CHECK(blur.matches("the image is TOO BLURRY to judge"));
  CHECK(blur.matches("very low resolution here"));
  CHECK(blur.matches("I cannot discern the features"));
  CHECK_FALSE(blur.matches("a sharp, well-lit portrait"));
  CHECK_FALSE(blur.matches(""));

  const BlurLexicon custom = BlurLexicon::parse("# notes\npixelated\n");
  CHECK(custom.matches("looks Pixelated to me"));
  CHECK_FALSE(custom.matches("too blurry"));  // custom table replaces the builtin
}

TEST_CASE("rewrite collects k distinct slot-bearing variants") {
  MockServer server;
  server.set_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_body("How would you label {candidates} here?\n"
                              "Pick the best fit among {candidates}.\n"
                              "Of {candidates}, which applies?\n"
                              "Choose one: {candidates}.\n"
                              "Select from {candidates} now.\n"),
                    "application/json");
  });
  RewriteOptions options;
  const QuestionPool pool =
      rewrite_questions("Seed asks {candidates}.", 5, fast_config(server), options);
  CHECK(pool.seed == "Seed asks {candidates}.");
  CHECK(pool.k == 5);
  REQUIRE(pool.variants.size() == 5);
  std::set<std::string> distinct(pool.variants.begin(), pool.variants.end());
  CHECK(distinct.size() == 5);
  for (const auto& v : pool.variants) {
    CHECK(v.find(kCandidateSlot) != std::string::npos);
  }
}

TEST_CASE("rewrite discards duplicates, seed echoes, and slotless lines") {
  MockServer server;
  std::atomic<int> round{0};
  server.set_handler([&](const httplib::Request&, httplib::Response& res) {
    if (round.fetch_add(1) == 0) {
      // One usable line; the rest echo the seed, repeat, drop the slot, or
      // double it.
      res.set_content(chat_body("Seed asks {candidates}.\n"
                                "First good {candidates} variant.\n"
                                "First   good {candidates}   variant.\n"
                                "No slot at all.\n"
                                "Two {candidates} slots {candidates}.\n"),
                      "application/json");
    } else {
      res.set_content(chat_body("Second good {candidates} variant.\n"), "application/json");
    }
  });
  const QuestionPool pool =
      rewrite_questions("Seed asks {candidates}.", 2, fast_config(server));
  REQUIRE(pool.variants.size() == 2);
  CHECK(pool.variants[0] == "First good {candidates} variant.");
  CHECK(pool.variants[1] == "Second good {candidates} variant.");
  CHECK(server.hits() == 2);
}

TEST_CASE("rewrite strips list numbering, bullets, and quotes") {
  MockServer server;
  server.set_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_body("1. Numbered {candidates} line.\n"
                              "- Bulleted {candidates} line.\n"
                              "\"Quoted {candidates} line.\"\n"),
                    "application/json");
  });
  const QuestionPool pool = rewrite_questions("S {candidates}.", 3, fast_config(server));
  REQUIRE(pool.variants.size() == 3);
  CHECK(pool.variants[0] == "Numbered {candidates} line.");
  CHECK(pool.variants[1] == "Bulleted {candidates} line.");
  CHECK(pool.variants[2] == "Quoted {candidates} line.");
}

TEST_CASE("rewrite gives up after the round budget") {
  MockServer server;
  server.set_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_body("Same {candidates} every time.\n"), "application/json");
  });
  RewriteOptions options;
  options.max_rounds = 3;
  CHECK_THROWS_AS(rewrite_questions("S {candidates}.", 4, fast_config(server), options),
                  InsufficientVariants);
  CHECK(server.hits() == 3);
}

TEST_CASE("rewrite requires a slot in the seed") {
  MockServer server;
  CHECK_THROWS_AS(rewrite_questions("no slot", 2, fast_config(server)), MissingPlaceholder);
  CHECK(server.hits() == 0);
}

TEST_CASE("assemble is deterministic and keeps input order") {
  QuestionPool pool;
  pool.seed = "s {candidates}";
  pool.variants = {"va {candidates}", "vb {candidates}", "vc {candidates}"};

  std::vector<AssemblyPair> pairs;
  for (int i = 0; i < 40; ++i) {
    AssemblyPair p;
    p.image = "img" + std::to_string(i) + ".png";
    p.label = all_labels()[static_cast<std::size_t>(i) % kLabelCount];
    p.dataset = DatasetId::ferplus;
    pairs.push_back(p);
  }

  const AssemblyResult a = assemble_rlvr(pairs, pool, 77);
  const AssemblyResult b = assemble_rlvr(pairs, pool, 77);
  CHECK(a.records == b.records);
  CHECK(a.skipped.empty());
  REQUIRE(a.records.size() == 40);
  for (int i = 0; i < 40; ++i) {
    CHECK(a.records[i].image == pairs[i].image);
    CHECK(a.records[i].label == pairs[i].label);
  }

  const AssemblyResult c = assemble_rlvr(pairs, pool, 78);
  bool differs = false;
  for (int i = 0; i < 40; ++i) differs = differs || a.records[i].question != c.records[i].question;
  CHECK(differs);
}

TEST_CASE("assemble varies the sampled variant across items") {
  QuestionPool pool;
  pool.seed = "s {candidates}";
  for (int i = 0; i < 4; ++i) pool.variants.push_back("v" + std::to_string(i) + " {candidates}");
  std::vector<AssemblyPair> pairs(32, AssemblyPair{"x.png", EmotionLabel::anger,
                                                   DatasetId::rafdb});
  const AssemblyResult r = assemble_rlvr(pairs, pool, 5);
  std::set<std::string> questions;
  for (const auto& rec : r.records) questions.insert(rec.question);
  CHECK(questions.size() > 1);
}

TEST_CASE("assemble disambiguates repeated ids and skips bad labels") {
  const QuestionPool pool = QuestionPool::seed_only("s {candidates}");
  std::vector<AssemblyPair> pairs = {
      {"same.png", EmotionLabel::anger, DatasetId::rafdb},
      {"same.png", EmotionLabel::fear, DatasetId::rafdb},
      {"other.png", EmotionLabel::contempt, DatasetId::rafdb},  // not in the 7-class panel
      {"same.png", EmotionLabel::sadness, DatasetId::rafdb},
  };
  const AssemblyResult r = assemble_rlvr(pairs, pool, 1);
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].id == "rafdb:same.png");
  CHECK(r.records[1].id == "rafdb:same.png#1");
  CHECK(r.records[2].id == "rafdb:same.png#2");
  REQUIRE(r.skipped.size() == 1);
  CHECK(r.skipped[0].first == 2);
}

TEST_CASE("synthesis instruction leaks the label on purpose, with cues") {
  const VqaRecord record = happiness_record();
  const std::string text = synthesis_instruction(record, RuleTable::builtin());
  CHECK(text.find("happiness") != std::string::npos);
  for (const auto& cue : RuleTable::builtin().cues_for(EmotionLabel::happiness)) {
    CHECK(text.find(cue) != std::string::npos);
  }
  CHECK(text.find("<think>") != std::string::npos);
  CHECK(text.find("<answer>") != std::string::npos);
  CHECK(text.find("exactly \"happiness\"") != std::string::npos);
  CHECK(text.find(kCandidateSlot) == std::string::npos);
}

TEST_CASE("synthesize_trajectory stores the verbatim response as pending") {
  MockServer server;
  server.set_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_body("<think>soft smile</think><answer>happiness</answer>"),
                    "application/json");
  });
  SynthesisOptions options;
  options.model = "writer";
  const CotRecord cot =
      synthesize_trajectory(happiness_record(), RuleTable::builtin(), fast_config(server),
                            options);
  CHECK(cot.vqa == happiness_record());
  CHECK(cot.raw_output == "<think>soft smile</think><answer>happiness</answer>");
  CHECK(cot.source_model == "writer");
  CHECK(cot.qc_status == QcStatus::pending);
  CHECK(cot.trajectory.empty());
}

TEST_CASE("synthesis attaches image bytes when the file exists") {
  MockServer server;
  test::TmpDir tmp;
  std::atomic<bool> saw_image{false};
  server.set_handler([&](const httplib::Request& req, httplib::Response& res) {
    saw_image = test::request_has_image(req);
    res.set_content(chat_body("ok"), "application/json");
  });

  SynthesisOptions options;
  options.images_root = tmp.path;

  // Missing file: text-only by default, fatal when images are required.
  synthesize_trajectory(happiness_record(), RuleTable::builtin(), fast_config(server), options);
  CHECK_FALSE(saw_image.load());

  options.require_images = true;
  CHECK_THROWS_AS(synthesize_trajectory(happiness_record(), RuleTable::builtin(),
                                        fast_config(server), options),
                  Error);

  {
    std::ofstream out(tmp.file("h.png"), std::ios::binary);
    out << "png bytes";
  }
  synthesize_trajectory(happiness_record(), RuleTable::builtin(), fast_config(server), options);
  CHECK(saw_image.load());
}

TEST_CASE("batch synthesis keeps failed items as pending husks") {
  MockServer server;
  server.set_handler([](const httplib::Request& req, httplib::Response& res) {
    if (test::request_user_text(req).find("sadness") != std::string::npos) {
      res.status = 500;
      return;
    }
    res.set_content(chat_body("<think>t</think><answer>happiness</answer>"),
                    "application/json");
  });
  ClientConfig cfg = fast_config(server);
  cfg.retry_budget = 0;

  VqaRecord happy = happiness_record();
  VqaRecord sad = happiness_record();
  sad.id = "ferplus:s.png";
  sad.image = "s.png";
  sad.label = EmotionLabel::sadness;

  const std::vector<VqaRecord> records = {happy, sad};
  const auto cots = synthesize_trajectories(records, RuleTable::builtin(), cfg);
  REQUIRE(cots.size() == 2);
  CHECK(cots[0].raw_output == "<think>t</think><answer>happiness</answer>");
  CHECK(cots[1].raw_output.empty());
  CHECK(cots[1].qc_status == QcStatus::pending);
  CHECK(cots[1].vqa == sad);
}

TEST_CASE("qc keeps well-formed, on-label, clean trajectories") {
  const auto d = qc_filter(cot_with("<think>a gentle smile</think><answer>happiness</answer>"));
  CHECK(d.status == QcStatus::kept);
  CHECK_FALSE(d.reason.has_value());
}

TEST_CASE("qc tolerates leading whitespace and synonym answers") {
  CHECK(qc_filter(cot_with("  \n<think>t</think><answer>happy</answer>")).status ==
        QcStatus::kept);
  CHECK(qc_filter(cot_with("<think>t</think>\nSo: <answer>The person looks happy.</answer>"))
            .status == QcStatus::kept);
}

TEST_CASE("qc rejects outputs that do not open with a think pair") {
  for (const char* raw : {
           "Sure! <think>t</think><answer>happiness</answer>",  // preamble
           "<think>never closed <answer>happiness</answer>",    // unclosed
           "t</think><answer>happiness</answer>",               // close only
           "<answer>happiness</answer>",                        // no think at all
           "",                                                  // failed synthesis
       }) {
    const auto d = qc_filter(cot_with(raw));
    CHECK(d.status == QcStatus::rejected);
    CHECK(d.reason == RejectReason::malformed_tags);
  }
}

TEST_CASE("qc rejects answers that contradict the ground truth") {
  for (const char* raw : {
           "<think>t</think><answer>sadness</answer>",        // wrong label
           "<think>t</think><answer>unclear</answer>",        // unparseable
           "<think>t</think><answer>happy or sad</answer>",   // ambiguous
           "<think>t</think>no answer tag",                   // missing channel
           "<think>t</think><answer>happiness",               // unclosed answer
       }) {
    const auto d = qc_filter(cot_with(raw));
    CHECK(d.status == QcStatus::rejected);
    CHECK(d.reason == RejectReason::answer_mismatch);
  }
}

TEST_CASE("qc scores the last answer tag, like extraction") {
  const auto d = qc_filter(
      cot_with("<think>t</think><answer>sadness</answer> wait <answer>happiness</answer>"));
  CHECK(d.status == QcStatus::kept);
}

TEST_CASE("qc rejects blur mentions inside the reasoning") {
  const auto d = qc_filter(
      cot_with("<think>the face is too blurry to read</think><answer>happiness</answer>"));
  CHECK(d.status == QcStatus::rejected);
  CHECK(d.reason == RejectReason::blur_mention);

  // The rule reads the think content only.
  const auto outside = qc_filter(
      cot_with("<think>clear view</think><answer>happiness</answer> too blurry"));
  CHECK(outside.status == QcStatus::kept);
}

TEST_CASE("qc reports only the first failing rule") {
  // Malformed structure AND a blur phrase: structure wins.
  const auto d1 = qc_filter(cot_with("preamble <think>too blurry</think><answer>x</answer>"));
  CHECK(d1.reason == RejectReason::malformed_tags);

  // Wrong answer AND a blur phrase: the answer check wins.
  const auto d2 = qc_filter(
      cot_with("<think>too blurry here</think><answer>sadness</answer>"));
  CHECK(d2.reason == RejectReason::answer_mismatch);
}

TEST_CASE("filter_records counts, fills trajectories, and is idempotent") {
  std::vector<CotRecord> records = {
      cot_with("<think>warm smile</think><answer>happiness</answer>"),
      cot_with("no tags whatsoever"),
      cot_with("<think>ok</think><answer>fear</answer>"),
      cot_with("<think>too blurry</think><answer>happiness</answer>"),
      cot_with("<think>creased eyes</think><answer>happy</answer>"),
  };
  const QcReport report = filter_records(records);
  CHECK(report.input == 5);
  CHECK(report.kept == 2);
  CHECK(report.rejected_malformed_tags == 1);
  CHECK(report.rejected_answer_mismatch == 1);
  CHECK(report.rejected_blur_mention == 1);
  CHECK(report.kept + report.rejected_total() == report.input);

  CHECK(records[0].qc_status == QcStatus::kept);
  CHECK(records[0].trajectory == "warm smile");
  CHECK(records[1].qc_status == QcStatus::rejected);
  CHECK(records[1].trajectory.empty());
  CHECK(records[4].trajectory == "creased eyes");

  // Second pass recomputes the same outcome from raw_output alone.
  std::vector<CotRecord> again = records;
  const QcReport second = filter_records(again);
  CHECK(second.kept == report.kept);
  CHECK(second.rejected_total() == report.rejected_total());
  CHECK(again == records);

  // Even after someone scrambles the statuses.
  for (auto& r : again) {
    r.qc_status = QcStatus::kept;
    r.reject_reason.reset();
    r.trajectory = "stale";
  }
  filter_records(again);
  CHECK(again == records);
}

TEST_CASE("qc report serializes its tallies") {
  QcReport report;
  report.input = 10;
  report.kept = 4;
  report.rejected_malformed_tags = 3;
  report.rejected_answer_mismatch = 2;
  report.rejected_blur_mention = 1;
  const std::string json = report.to_json();
  CHECK(json.find("\"input\": 10") != std::string::npos);
  CHECK(json.find("\"kept\": 4") != std::string::npos);
  CHECK(json.find("\"malformed_tags\": 3") != std::string::npos);
}

TEST_CASE("dataset stats count labels and measure lengths") {
  std::vector<VqaRecord> records;
  const EmotionLabel labels[] = {EmotionLabel::happiness, EmotionLabel::happiness,
                                 EmotionLabel::anger, EmotionLabel::sadness};
  for (EmotionLabel l : labels) {
    VqaRecord r = happiness_record();
    r.label = l;
    r.question = "Pick one of {candidates} please";  // 5 whitespace tokens
    records.push_back(r);
  }

  const StatsReport chars = dataset_stats(records, LengthUnit::characters);
  CHECK(chars.total == 4);
  CHECK(chars.counts.at(EmotionLabel::happiness) == 2);
  CHECK(chars.counts.at(EmotionLabel::anger) == 1);
  CHECK(chars.percentages.at(EmotionLabel::happiness) == doctest::Approx(50.0));
  CHECK(chars.percentages.at(EmotionLabel::anger) == doctest::Approx(25.0));
  // Answers are the bare label tokens: happiness(9) x2, anger(5), sadness(7).
  CHECK(chars.answer_length.mean == doctest::Approx(7.5));
  CHECK(chars.answer_length.min == 5);
  CHECK(chars.answer_length.max == 9);
  CHECK(chars.question_length.mean == doctest::Approx(31.0));

  const StatsReport tokens = dataset_stats(records, LengthUnit::whitespace_tokens);
  CHECK(tokens.question_length.mean == doctest::Approx(5.0));
  CHECK(tokens.answer_length.mean == doctest::Approx(1.0));
}

TEST_CASE("cot stats measure the raw output as the answer text") {
  std::vector<CotRecord> records = {
      cot_with("<think>ab</think><answer>happiness</answer>"),
      cot_with("0123456789"),
  };
  const StatsReport report = dataset_stats(records, LengthUnit::characters);
  CHECK(report.total == 2);
  CHECK(report.answer_length.max == 43);
  CHECK(report.answer_length.min == 10);
}

TEST_CASE("stats percentage rounding keeps one decimal") {
  std::vector<VqaRecord> records;
  for (EmotionLabel l : {EmotionLabel::anger, EmotionLabel::fear, EmotionLabel::happiness}) {
    VqaRecord r = happiness_record();
    r.label = l;
    records.push_back(r);
  }
  const StatsReport report = dataset_stats(records, LengthUnit::characters);
  for (const auto& [label, pct] : report.percentages) {
    CHECK(pct == doctest::Approx(33.3));
  }
}

TEST_CASE("stats refuse empty input") {
  CHECK_THROWS_AS(dataset_stats(std::vector<VqaRecord>{}, LengthUnit::characters), EmptyInput);
}

TEST_CASE("word frequencies lowercase, stop, and sort deterministically") {
  // "dog-days" splits into two alpha runs, so happy, days, and dog all
  // count 2 and the tie breaks lexicographically.
  const std::vector<std::string> texts = {"The happy happy dog!", "happy days are here, dog-days"};
  const auto freqs = word_frequencies(texts, default_stop_words());
  REQUIRE(freqs.size() >= 3);
  CHECK(freqs[0].first == "happy");
  CHECK(freqs[0].second == 3);
  CHECK(freqs[1].first == "days");
  CHECK(freqs[1].second == 2);
  CHECK(freqs[2].first == "dog");
  CHECK(freqs[2].second == 2);
  for (const auto& [word, count] : freqs) {
    CHECK(word != "the");
    CHECK(word != "are");
  }
}

TEST_CASE("word frequencies read the requested record field") {
  std::vector<CotRecord> records = {cot_with("x")};
  records[0].vqa.question = "smile smile smile";
  records[0].trajectory = "eyebrows eyebrows";
  const auto q = word_frequencies(records, TextField::question);
  CHECK(q[0] == std::pair<std::string, std::size_t>{"smile", 3});
  const auto t = word_frequencies(records, TextField::trajectory);
  CHECK(t[0] == std::pair<std::string, std::size_t>{"eyebrows", 2});
}

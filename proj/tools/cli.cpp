#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ferkit/client.hpp"
#include "ferkit/curation.hpp"
#include "ferkit/errors.hpp"
#include "ferkit/extraction.hpp"
#include "ferkit/jsonl.hpp"
#include "ferkit/labels.hpp"
#include "ferkit/metrics.hpp"
#include "ferkit/prompting.hpp"
#include "ferkit/records.hpp"
#include "ferkit/rlvr.hpp"

namespace ferkit::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fresh_run_id() {
  static std::mt19937_64 rng(std::random_device{}());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

// Parse failures gain file:line context; the raw parser only knows the text.
template <typename Record>
std::vector<Record> load_jsonl(const fs::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<Record> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(Record::from_jsonl_line(lines[i]));
    } catch (const Error& ex) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": " + ex.what());
    }
  }
  return out;
}

struct ManifestWriter {
  fs::path out_dir;
  std::string subcommand;
  std::string run_id = fresh_run_id();
  std::string started_at = iso8601_utc_now();
  ordered_json config = ordered_json::object();
  ordered_json inputs = ordered_json::array();
  ordered_json outputs = ordered_json::array();
  ordered_json counts = ordered_json::object();

  void write() const {
    ordered_json doc;
    doc["run_id"] = run_id;
    doc["subcommand"] = subcommand;
    doc["config"] = config;
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    doc["started_at"] = started_at;
    doc["finished_at"] = iso8601_utc_now();
    doc["record_counts"] = counts;
    // A bare relative output file has an empty parent: that is the cwd.
    const fs::path dir = out_dir.empty() ? fs::path(".") : out_dir;
    fs::create_directories(dir);
    std::ofstream out(dir / "manifests.jsonl", std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot append run manifest in " + dir.string());
    out << doc.dump() << '\n';
  }
};

struct ClientFlags {
  ClientConfig cfg;

  void attach(CLI::App* cmd, bool with_concurrency = true) {
    cmd->add_option("--endpoint", cfg.endpoint, "Chat-completion endpoint URL")->required();
    cmd->add_option("--api-key-env", cfg.api_key_env,
                    "Environment variable holding the API key");
    if (with_concurrency) {
      cmd->add_option("--concurrency", cfg.max_in_flight, "Max in-flight requests")
          ->check(CLI::PositiveNumber);
    }
    cmd->add_option("--retries", cfg.retry_budget, "Retry budget per request")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--cache-dir", cfg.cache_dir, "Response cache directory (empty disables)");
    cmd->add_option("--timeout", cfg.timeout_sec, "Per-request timeout, seconds")
        ->check(CLI::PositiveNumber);
  }
};

LabelConfig load_label_config(const std::string& path) {
  return path.empty() ? LabelConfig::defaults() : LabelConfig::from_file(path);
}

ordered_json stats_both_units_json(const std::vector<VqaRecord>& records) {
  ordered_json doc;
  doc["characters"] =
      ordered_json::parse(dataset_stats(std::span(records), LengthUnit::characters).to_json());
  doc["whitespace_tokens"] = ordered_json::parse(
      dataset_stats(std::span(records), LengthUnit::whitespace_tokens).to_json());
  return doc;
}

ordered_json stats_both_units_json(const std::vector<CotRecord>& records) {
  ordered_json doc;
  doc["characters"] =
      ordered_json::parse(dataset_stats(std::span(records), LengthUnit::characters).to_json());
  doc["whitespace_tokens"] = ordered_json::parse(
      dataset_stats(std::span(records), LengthUnit::whitespace_tokens).to_json());
  return doc;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string manifest;
  std::string model;
  std::string out_dir;
  std::string images_root = ".";
  std::string label_config;
  double temperature = 0.0;
  int max_tokens = 2048;
  bool require_images = false;
  ClientFlags client;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const std::vector<VqaRecord> records = load_jsonl<VqaRecord>(args.manifest);
  if (records.empty()) throw EmptyInput("manifest has no records: " + args.manifest);
  const LabelConfig label_cfg = load_label_config(args.label_config);

  std::vector<ChatRequest> reqs;
  reqs.reserve(records.size());
  std::size_t missing_images = 0;
  for (const VqaRecord& r : records) {
    const PromptBundle bundle = build_prompt_bundle(r);
    ChatRequest req;
    req.model = args.model;
    req.system = bundle.system;
    req.user = bundle.user;
    req.temperature = args.temperature;
    req.max_output_tokens = args.max_tokens;
    if (auto bytes = try_read_file(fs::path(args.images_root) / r.image)) {
      req.image = std::move(*bytes);
    } else if (args.require_images) {
      throw Error("image not found under --images-root: " + r.image);
    } else {
      ++missing_images;
    }
    reqs.push_back(std::move(req));
  }
  if (missing_images > 0) {
    std::cerr << "warning: " << missing_images
              << " image file(s) not found; those requests went out text-only\n";
  }

  const std::vector<BatchItem> items = batch_complete(reqs, args.client.cfg);

  std::vector<EvalRecord> results;
  std::map<DatasetId, std::vector<EvalRecord>> by_dataset;
  std::size_t item_failures = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    EvalRecord er;
    er.id = records[i].id;
    er.dataset = records[i].dataset;
    er.model = args.model;
    er.gt = records[i].label;
    if (items[i].ok()) {
      er.raw_response = items[i].response.text;
      const ExtractionResult ex = extract_answer(er.raw_response, records[i].candidates);
      er.extracted_label = ex.label;
      er.extraction_method = ex.method;
    } else {
      ++item_failures;
      er.extraction_method = ExtractionMethod::failed;
    }
    er.correct = er.extracted_label && *er.extracted_label == er.gt;
    by_dataset[er.dataset].push_back(er);
    results.push_back(std::move(er));
  }
  if (item_failures > 0) {
    std::cerr << "warning: " << item_failures
              << " request(s) failed and were scored as failed extraction\n";
  }

  const EvalReport report = aggregate(args.model, by_dataset, label_cfg);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  write_jsonl(out / "records.jsonl", results);
  atomic_write_file(out / "report.json", report.to_json() + "\n");
  for (const DatasetReport& d : report.per_dataset) {
    const std::string stem = "confusion_" + std::string(to_string(d.dataset));
    atomic_write_file(out / (stem + ".csv"), confusion_csv(d.confusion));
    atomic_write_file(out / (stem + ".svg"), confusion_svg(d.confusion));
  }

  ManifestWriter manifest{out, "evaluate"};
  manifest.config = {{"model", args.model},
                     {"endpoint", args.client.cfg.endpoint},
                     {"temperature", args.temperature},
                     {"concurrency", args.client.cfg.max_in_flight},
                     {"max_tokens", args.max_tokens},
                     {"cache_dir", args.client.cfg.cache_dir},
                     {"images_root", args.images_root}};
  manifest.inputs.push_back(args.manifest);
  manifest.outputs.push_back((out / "records.jsonl").string());
  manifest.outputs.push_back((out / "report.json").string());
  manifest.counts = {{"records", results.size()}, {"request_failures", item_failures}};
  manifest.write();

  std::printf("%s: %zu records, overall accuracy %.4f, overall macro-F1 %.4f\n",
              args.model.c_str(), report.record_count, report.overall_accuracy,
              report.overall_macro_f1);
  std::printf("wrote %s\n", (out / "report.json").c_str());
  return 0;
}

// ----------------------------------------------------------------- curate

struct RewriteArgs {
  std::string seed;
  std::string seed_file;
  std::size_t k = 100;
  std::string model = "rewriter";
  std::string out;
  double temperature = 1.0;
  std::size_t max_rounds = 8;
  ClientFlags client;
};

int cmd_rewrite(const RewriteArgs& args) {
  std::string seed = args.seed;
  if (!args.seed_file.empty()) {
    seed = read_text_file(args.seed_file);
    while (!seed.empty() && (seed.back() == '\n' || seed.back() == '\r')) seed.pop_back();
  }
  if (seed.empty()) seed = default_seed_question();

  RewriteOptions options;
  options.model = args.model;
  options.temperature = args.temperature;
  options.max_rounds = args.max_rounds;
  const QuestionPool pool = rewrite_questions(seed, args.k, args.client.cfg, options);
  pool.save(args.out);

  ManifestWriter manifest{fs::path(args.out).parent_path(), "curate rewrite"};
  manifest.config = {{"model", args.model},
                     {"k", args.k},
                     {"temperature", args.temperature},
                     {"endpoint", args.client.cfg.endpoint}};
  manifest.outputs.push_back(args.out);
  manifest.counts = {{"variants", pool.variants.size()}};
  manifest.write();

  std::printf("collected %zu variants into %s\n", pool.variants.size(), args.out.c_str());
  return 0;
}

struct AssembleArgs {
  std::string pairs;
  std::string pool;
  std::string out;
  std::string label_config;
  std::uint64_t seed = 0;
};

std::vector<AssemblyPair> load_pairs(const fs::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<AssemblyPair> pairs;
  pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fail = [&](const std::string& msg) -> ParseError {
      return ParseError(path.string() + ":" + std::to_string(i + 1) + ": " + msg);
    };
    const ordered_json doc = ordered_json::parse(lines[i], nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw fail("not a JSON object");
    AssemblyPair p;
    if (!doc.contains("image") || !doc["image"].is_string()) throw fail("missing 'image'");
    p.image = doc["image"].get<std::string>();
    const auto label = doc.contains("label") && doc["label"].is_string()
                           ? label_from_token(doc["label"].get<std::string>())
                           : std::nullopt;
    if (!label) throw fail("missing or unknown 'label'");
    p.label = *label;
    const auto dataset = doc.contains("dataset") && doc["dataset"].is_string()
                             ? dataset_from_token(doc["dataset"].get<std::string>())
                             : std::nullopt;
    if (!dataset) throw fail("missing or unknown 'dataset'");
    p.dataset = *dataset;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

int cmd_assemble(const AssembleArgs& args) {
  const std::vector<AssemblyPair> pairs = load_pairs(args.pairs);
  const QuestionPool pool = QuestionPool::from_file(args.pool);
  const LabelConfig label_cfg = load_label_config(args.label_config);

  const AssemblyResult result = assemble_rlvr(pairs, pool, args.seed, label_cfg);
  write_jsonl(args.out, result.records);
  for (const auto& [index, message] : result.skipped) {
    std::cerr << "skipped pair " << index << ": " << message << "\n";
  }

  ManifestWriter manifest{fs::path(args.out).parent_path(), "curate assemble"};
  manifest.config = {{"seed", args.seed}, {"pool", args.pool}};
  manifest.inputs.push_back(args.pairs);
  manifest.outputs.push_back(args.out);
  manifest.counts = {{"pairs", pairs.size()},
                     {"records", result.records.size()},
                     {"skipped", result.skipped.size()}};
  manifest.write();

  std::printf("assembled %zu records (%zu skipped) into %s\n", result.records.size(),
              result.skipped.size(), args.out.c_str());
  return 0;
}

struct SynthesizeArgs {
  std::string dataset;
  std::string out;
  std::string model = "synthesizer";
  std::string rules_file;
  std::string images_root = ".";
  bool require_images = false;
  ClientFlags client;
};

int cmd_synthesize(const SynthesizeArgs& args) {
  const std::vector<VqaRecord> records = load_jsonl<VqaRecord>(args.dataset);
  const RuleTable rules =
      args.rules_file.empty() ? RuleTable::builtin() : RuleTable::from_file(args.rules_file);

  SynthesisOptions options;
  options.model = args.model;
  options.images_root = args.images_root;
  options.require_images = args.require_images;
  const std::vector<CotRecord> cots =
      synthesize_trajectories(records, rules, args.client.cfg, options);
  write_jsonl(args.out, cots);

  ManifestWriter manifest{fs::path(args.out).parent_path(), "curate synthesize"};
  manifest.config = {{"model", args.model},
                     {"endpoint", args.client.cfg.endpoint},
                     {"rules", args.rules_file.empty() ? "builtin" : args.rules_file}};
  manifest.inputs.push_back(args.dataset);
  manifest.outputs.push_back(args.out);
  manifest.counts = {{"records", cots.size()}};
  manifest.write();

  std::printf("synthesized %zu pending trajectories into %s\n", cots.size(), args.out.c_str());
  return 0;
}

struct FilterArgs {
  std::string dataset;
  std::string out;
  std::string blur_file;
};

int cmd_filter(const FilterArgs& args) {
  std::vector<CotRecord> records = load_jsonl<CotRecord>(args.dataset);
  const BlurLexicon blur =
      args.blur_file.empty() ? BlurLexicon::builtin() : BlurLexicon::from_file(args.blur_file);

  const QcReport report = filter_records(records, blur);

  std::vector<CotRecord> kept, rejected;
  for (CotRecord& r : records) {
    (r.qc_status == QcStatus::kept ? kept : rejected).push_back(std::move(r));
  }
  const fs::path out(args.out);
  const fs::path dir = out.parent_path();
  write_jsonl(out, kept);
  write_jsonl(dir / "rejected.jsonl", rejected);
  atomic_write_file(dir / "qc_report.json", report.to_json() + "\n");

  ManifestWriter manifest{dir, "curate filter"};
  manifest.config = {{"blur_lexicon", args.blur_file.empty() ? "builtin" : args.blur_file}};
  manifest.inputs.push_back(args.dataset);
  manifest.outputs.push_back(out.string());
  manifest.counts = {{"input", report.input},
                     {"kept", report.kept},
                     {"rejected", report.rejected_total()}};
  manifest.write();

  std::printf(
      "kept %zu of %zu (malformed_tags %zu, answer_mismatch %zu, blur_mention %zu)\n",
      report.kept, report.input, report.rejected_malformed_tags,
      report.rejected_answer_mismatch, report.rejected_blur_mention);
  return 0;
}

struct StatsArgs {
  std::string dataset;
  std::string out;
  std::string kind = "auto";
};

int cmd_stats(const StatsArgs& args) {
  const std::vector<std::string> lines = read_lines(args.dataset);
  if (lines.empty()) throw EmptyInput("dataset has no records: " + args.dataset);

  bool cot = args.kind == "cot";
  if (args.kind == "auto") {
    const ordered_json first = ordered_json::parse(lines.front(), nullptr, false);
    cot = first.is_object() && first.contains("raw_output");
  }

  ordered_json doc;
  std::size_t count = 0;
  if (cot) {
    const std::vector<CotRecord> records = load_jsonl<CotRecord>(args.dataset);
    count = records.size();
    doc = stats_both_units_json(records);
  } else {
    const std::vector<VqaRecord> records = load_jsonl<VqaRecord>(args.dataset);
    count = records.size();
    doc = stats_both_units_json(records);
  }
  const std::string body = doc.dump(2) + "\n";
  if (args.out.empty()) {
    std::fputs(body.c_str(), stdout);
  } else {
    atomic_write_file(args.out, body);
    ManifestWriter manifest{fs::path(args.out).parent_path(), "curate stats"};
    manifest.config = {{"kind", cot ? "cot" : "vqa"}};
    manifest.inputs.push_back(args.dataset);
    manifest.outputs.push_back(args.out);
    manifest.counts = {{"records", count}};
    manifest.write();
    std::printf("wrote %s\n", args.out.c_str());
  }
  return 0;
}

// ----------------------------------------------------------------- report

struct ReportArgs {
  std::string results_dir;
  std::string out_dir;
  std::string format = "all";
};

int cmd_report(const ReportArgs& args) {
  std::vector<EvalReport> reports;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(args.results_dir, ec);
       !ec && it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file() || it->path().filename() != "report.json") continue;
    try {
      reports.push_back(EvalReport::from_json(read_text_file(it->path())));
    } catch (const Error& ex) {
      std::cerr << "skipping unreadable report " << it->path() << ": " << ex.what() << "\n";
    }
  }
  if (reports.empty()) throw NoResults("no report.json files under " + args.results_dir);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  const bool all = args.format == "all";
  if (all || args.format == "md") {
    atomic_write_file(out / "leaderboard.md", leaderboard_markdown(reports));
  }
  if (all || args.format == "json") {
    atomic_write_file(out / "leaderboard.json", leaderboard_json(reports) + "\n");
  }
  if (all || args.format == "csv" || args.format == "svg") {
    for (const EvalReport& r : reports) {
      for (const DatasetReport& d : r.per_dataset) {
        const std::string stem =
            "confusion_" + r.model + "_" + std::string(to_string(d.dataset));
        if (all || args.format == "csv") {
          atomic_write_file(out / (stem + ".csv"), confusion_csv(d.confusion));
        }
        if (all || args.format == "svg") {
          atomic_write_file(out / (stem + ".svg"), confusion_svg(d.confusion));
        }
      }
    }
  }

  ManifestWriter manifest{out, "report"};
  manifest.config = {{"format", args.format}};
  manifest.inputs.push_back(args.results_dir);
  manifest.counts = {{"models", reports.size()}};
  manifest.write();

  std::printf("ranked %zu model report(s) into %s\n", reports.size(), out.c_str());
  return 0;
}

// ------------------------------------------------------------------- rlvr

struct CheckGradArgs {
  std::size_t instances = 50;
  std::uint64_t seed = 7;
  std::string out;
};

int cmd_check_gradients(const CheckGradArgs& args) {
  const GradCheckReport report = check_gradients(args.instances, args.seed);
  const std::string body = report.to_json() + "\n";
  std::fputs(body.c_str(), stdout);
  if (!args.out.empty()) atomic_write_file(args.out, body);
  return report.pass ? 0 : 1;
}

struct ScoreArgs {
  std::string pairs;
  std::string out;
};

int cmd_score(const ScoreArgs& args) {
  const std::vector<std::string> lines = read_lines(args.pairs);
  std::string body;
  const auto& eight = label_set(DatasetId::ferplus);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fail = [&](const std::string& msg) -> ParseError {
      return ParseError(args.pairs + ":" + std::to_string(i + 1) + ": " + msg);
    };
    const ordered_json doc = ordered_json::parse(lines[i], nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw fail("not a JSON object");
    if (!doc.contains("response") || !doc["response"].is_string()) throw fail("missing 'response'");
    const auto gt = doc.contains("gt") && doc["gt"].is_string()
                        ? label_from_token(doc["gt"].get<std::string>())
                        : std::nullopt;
    if (!gt) throw fail("missing or unknown 'gt'");

    std::vector<EmotionLabel> candidates(eight.begin(), eight.end());
    if (doc.contains("candidates")) {
      candidates.clear();
      for (const auto& item : doc["candidates"]) {
        const auto label = label_from_token(item.get<std::string>());
        if (!label) throw fail("unknown candidate label");
        candidates.push_back(*label);
      }
    }
    const RewardBreakdown r = reward(doc["response"].get<std::string>(), *gt, candidates);
    body += r.to_json();
    body += '\n';
  }
  if (args.out.empty()) {
    std::fputs(body.c_str(), stdout);
  } else {
    atomic_write_file(args.out, body);
    std::printf("scored %zu pair(s) into %s\n", lines.size(), args.out.c_str());
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Closed-set facial-expression VQA evaluation and data curation toolkit"};
  app.require_subcommand(1);

  EvaluateArgs eval_args;
  CLI::App* eval = app.add_subcommand("evaluate", "Run a model over a VQA manifest and score it");
  eval->add_option("--manifest", eval_args.manifest, "VQA records, one JSON per line")
      ->required();
  eval->add_option("--model", eval_args.model, "Model name sent to the endpoint")->required();
  eval->add_option("--out", eval_args.out_dir, "Output directory")->required();
  eval->add_option("--images-root", eval_args.images_root, "Directory image paths resolve under");
  eval->add_option("--label-config", eval_args.label_config, "Per-dataset candidate sets, JSON");
  eval->add_option("--temperature", eval_args.temperature, "Sampling temperature")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--max-tokens", eval_args.max_tokens, "Response token cap")
      ->check(CLI::PositiveNumber);
  eval->add_flag("--require-images", eval_args.require_images,
                 "Fail instead of sending text-only when an image file is missing");
  eval_args.client.attach(eval);

  CLI::App* curate = app.add_subcommand("curate", "Dataset curation stages");
  curate->require_subcommand(1);

  RewriteArgs rewrite_args;
  CLI::App* rewrite = curate->add_subcommand("rewrite", "Expand a seed question into a pool");
  rewrite->add_option("--seed-text", rewrite_args.seed, "Seed question text");
  rewrite->add_option("--seed-file", rewrite_args.seed_file, "File holding the seed question");
  rewrite->add_option("--k", rewrite_args.k, "Variants to collect")->check(CLI::PositiveNumber);
  rewrite->add_option("--model", rewrite_args.model, "Rewriting model name");
  rewrite->add_option("--out", rewrite_args.out, "Pool file to write")->required();
  rewrite->add_option("--temperature", rewrite_args.temperature, "Rewriting temperature")
      ->check(CLI::NonNegativeNumber);
  rewrite->add_option("--max-rounds", rewrite_args.max_rounds, "Re-request budget");
  rewrite_args.client.attach(rewrite, /*with_concurrency=*/false);

  AssembleArgs assemble_args;
  CLI::App* assemble = curate->add_subcommand("assemble", "Build VQA records from (image, label, dataset) pairs");
  assemble->add_option("--pairs", assemble_args.pairs, "Pairs file, one JSON per line")
      ->required();
  assemble->add_option("--pool", assemble_args.pool, "Question pool file")->required();
  assemble->add_option("--out", assemble_args.out, "Dataset file to write")->required();
  assemble->add_option("--label-config", assemble_args.label_config,
                       "Per-dataset candidate sets, JSON");
  assemble->add_option("--seed", assemble_args.seed, "Question sampling seed");

  SynthesizeArgs synth_args;
  CLI::App* synth = curate->add_subcommand("synthesize", "Generate reasoning trajectories");
  synth->add_option("--dataset", synth_args.dataset, "VQA dataset file")->required();
  synth->add_option("--out", synth_args.out, "Trajectory dataset to write")->required();
  synth->add_option("--model", synth_args.model, "Synthesis model name");
  synth->add_option("--rules", synth_args.rules_file, "Facial-cue rule file");
  synth->add_option("--images-root", synth_args.images_root,
                    "Directory image paths resolve under");
  synth->add_flag("--require-images", synth_args.require_images,
                  "Fail instead of sending text-only when an image file is missing");
  synth_args.client.attach(synth);

  FilterArgs filter_args;
  CLI::App* filter = curate->add_subcommand("filter", "Quality-control a trajectory dataset");
  filter->add_option("--dataset", filter_args.dataset, "Trajectory dataset file")->required();
  filter->add_option("--out", filter_args.out, "Kept-records file to write")->required();
  filter->add_option("--blur-lexicon", filter_args.blur_file, "Blur phrase file");

  StatsArgs stats_args;
  CLI::App* stats = curate->add_subcommand("stats", "Dataset statistics in both length units");
  stats->add_option("--dataset", stats_args.dataset, "Dataset file")->required();
  stats->add_option("--out", stats_args.out, "Stats JSON to write (stdout when omitted)");
  stats->add_option("--kind", stats_args.kind, "vqa, cot, or auto")
      ->check(CLI::IsMember({"vqa", "cot", "auto"}));

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "Rank evaluation reports into a leaderboard");
  report->add_option("--results", report_args.results_dir, "Directory holding report.json files")
      ->required();
  report->add_option("--out", report_args.out_dir, "Output directory")->required();
  report->add_option("--format", report_args.format, "md, json, csv, svg, or all")
      ->check(CLI::IsMember({"md", "json", "csv", "svg", "all"}));

  CLI::App* rlvr = app.add_subcommand("rlvr", "Training-math verification utilities");
  rlvr->require_subcommand(1);

  CheckGradArgs grad_args;
  CLI::App* grad = rlvr->add_subcommand("check-gradients",
                                        "Finite-difference check of the analytic gradients");
  grad->add_option("--instances", grad_args.instances, "Random instances to test")
      ->check(CLI::PositiveNumber);
  grad->add_option("--seed", grad_args.seed, "Instance generator seed");
  grad->add_option("--out", grad_args.out, "Report JSON to write");

  ScoreArgs score_args;
  CLI::App* score = rlvr->add_subcommand("score", "Reward breakdowns for (response, gt) pairs");
  score->add_option("--pairs", score_args.pairs, "Pairs file, one JSON per line")->required();
  score->add_option("--out", score_args.out, "Breakdown JSONL to write (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0, usage errors exit 2
  }

  try {
    if (*eval) return cmd_evaluate(eval_args);
    if (*rewrite) return cmd_rewrite(rewrite_args);
    if (*assemble) return cmd_assemble(assemble_args);
    if (*synth) return cmd_synthesize(synth_args);
    if (*filter) return cmd_filter(filter_args);
    if (*stats) return cmd_stats(stats_args);
    if (*report) return cmd_report(report_args);
    if (*grad) return cmd_check_gradients(grad_args);
    if (*score) return cmd_score(score_args);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;  // no subcommand matched
}

}  // namespace ferkit::cli

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "ferkit/errors.hpp"
#include "ferkit/metrics.hpp"
#include "ferkit/rng.hpp"
#include "generators.hpp"
#include "oracle_metrics.hpp"

using namespace ferkit;
using test::make_eval;
using test::oracle_accuracy;
using test::oracle_class;
using test::oracle_confusion;
using test::oracle_macro_f1;
using test::random_eval_records;

namespace {

constexpr double kTight = 1e-12;

std::vector<EvalRecord> worked_example() {
  // 6 records over a 3-label view: 3 correct, 1 wrong, 2 failed.
  return {
      make_eval(EmotionLabel::anger, EmotionLabel::anger),
      make_eval(EmotionLabel::anger, EmotionLabel::happiness),
      make_eval(EmotionLabel::happiness, EmotionLabel::happiness),
      make_eval(EmotionLabel::happiness, std::nullopt),
      make_eval(EmotionLabel::sadness, EmotionLabel::sadness),
      make_eval(EmotionLabel::sadness, std::nullopt),
  };
}

}  // namespace

TEST_CASE("accuracy counts failed extractions as incorrect") {
  const auto records = worked_example();
  CHECK(accuracy(records) == doctest::Approx(0.5).epsilon(kTight));
  CHECK_THROWS_AS(accuracy(std::vector<EvalRecord>{}), EmptyInput);
}

TEST_CASE("per-class scores on a worked example") {
  const auto records = worked_example();
  const std::vector<EmotionLabel> labels = {EmotionLabel::anger, EmotionLabel::happiness,
                                            EmotionLabel::sadness};
  const ClassReport report = per_class_f1(records, labels);
  REQUIRE(report.classes.size() == 3);

  // anger: tp=1, predicted=1, gt=2.
  CHECK(report.classes[0].precision == doctest::Approx(1.0));
  CHECK(report.classes[0].recall == doctest::Approx(0.5));
  CHECK(report.classes[0].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(report.classes[0].support == 2);

  // happiness: tp=1, predicted=2, gt=2.
  CHECK(report.classes[1].precision == doctest::Approx(0.5));
  CHECK(report.classes[1].recall == doctest::Approx(0.5));
  CHECK(report.classes[1].f1 == doctest::Approx(0.5));

  // sadness: tp=1, predicted=1, gt=2.
  CHECK(report.classes[2].f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("zero-denominator classes score zero instead of NaN") {
  const std::vector<EvalRecord> records = {
      make_eval(EmotionLabel::anger, EmotionLabel::anger),
  };
  const std::vector<EmotionLabel> labels = {EmotionLabel::anger, EmotionLabel::fear};
  const ClassReport report = per_class_f1(records, labels);
  CHECK(report.classes[1].precision == 0.0);
  CHECK(report.classes[1].recall == 0.0);
  CHECK(report.classes[1].f1 == 0.0);
  CHECK(report.classes[1].support == 0);
  CHECK(std::isfinite(macro_f1(records, labels)));
}

TEST_CASE("metrics agree with brute-force recomputation on random data") {
  Rng rng(31337);
  constexpr auto panel = all_labels();
  const std::vector<EmotionLabel> labels(panel.begin(), panel.end());
  for (int trial = 0; trial < 50; ++trial) {
    const auto records = random_eval_records(rng, labels, 200 + rng.uniform_index(200));

    CHECK(accuracy(records) == doctest::Approx(oracle_accuracy(records)).epsilon(kTight));
    CHECK(macro_f1(records, labels) ==
          doctest::Approx(oracle_macro_f1(records, labels)).epsilon(kTight));

    const ClassReport report = per_class_f1(records, labels);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto oracle = oracle_class(records, labels[i]);
      CHECK(report.classes[i].label == labels[i]);
      CHECK(report.classes[i].precision == doctest::Approx(oracle.precision).epsilon(kTight));
      CHECK(report.classes[i].recall == doctest::Approx(oracle.recall).epsilon(kTight));
      CHECK(report.classes[i].f1 == doctest::Approx(oracle.f1).epsilon(kTight));
      CHECK(report.classes[i].support == oracle.support);
    }
  }
}

TEST_CASE("metrics are invariant under record permutation") {
  Rng rng(555);
  constexpr auto panel = all_labels();
  const std::vector<EmotionLabel> labels(panel.begin(), panel.end());
  auto records = random_eval_records(rng, labels, 500);
  const double acc = accuracy(records);
  const double mf1 = macro_f1(records, labels);

  std::shuffle(records.begin(), records.end(), rng.engine());
  CHECK(accuracy(records) == doctest::Approx(acc).epsilon(kTight));
  CHECK(macro_f1(records, labels) == doctest::Approx(mf1).epsilon(kTight));
}

TEST_CASE("accuracy equals support-weighted recall") {
  Rng rng(777);
  constexpr auto panel = all_labels();
  const std::vector<EmotionLabel> labels(panel.begin(), panel.end());
  for (int trial = 0; trial < 20; ++trial) {
    const auto records = random_eval_records(rng, labels, 400);
    const ClassReport report = per_class_f1(records, labels);
    double weighted = 0.0;
    for (const auto& c : report.classes) {
      weighted += c.recall * static_cast<double>(c.support);
    }
    weighted /= static_cast<double>(records.size());
    CHECK(std::abs(weighted - accuracy(records)) <= kTight);
  }
}

TEST_CASE("confusion matrix matches the pair-count oracle") {
  Rng rng(909);
  constexpr auto panel = all_labels();
  const std::vector<EmotionLabel> labels(panel.begin(), panel.end());
  const auto records = random_eval_records(rng, labels, 1000);
  const ConfusionMatrix cm = confusion(records, labels);
  const auto oracle = oracle_confusion(records, labels);

  REQUIRE(cm.labels == labels);
  REQUIRE(cm.counts.size() == labels.size());
  std::size_t oracle_total = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    REQUIRE(cm.counts[r].size() == labels.size());
    for (std::size_t c = 0; c < labels.size(); ++c) {
      const auto it = oracle.find({labels[r], labels[c]});
      const std::size_t want = it == oracle.end() ? 0 : it->second;
      CHECK(cm.counts[r][c] == want);
      oracle_total += want;
    }
    const auto fit = oracle.find({labels[r], std::nullopt});
    const std::size_t want_failed = fit == oracle.end() ? 0 : fit->second;
    CHECK(cm.overflow[r] == want_failed);
    oracle_total += want_failed;
  }
  CHECK(cm.total() == records.size());
  CHECK(oracle_total == records.size());
}

TEST_CASE("confusion overflow absorbs predictions outside the panel") {
  const std::vector<EmotionLabel> narrow = {EmotionLabel::anger, EmotionLabel::happiness};
  const std::vector<EvalRecord> records = {
      make_eval(EmotionLabel::anger, EmotionLabel::fear),  // pred not in panel
      make_eval(EmotionLabel::anger, std::nullopt),
      make_eval(EmotionLabel::happiness, EmotionLabel::happiness),
  };
  const ConfusionMatrix cm = confusion(records, narrow);
  CHECK(cm.overflow[0] == 2);
  CHECK(cm.counts[0][0] == 0);
  CHECK(cm.counts[1][1] == 1);
}

TEST_CASE("confusion rejects ground truth outside the panel") {
  const std::vector<EmotionLabel> narrow = {EmotionLabel::anger};
  const std::vector<EvalRecord> records = {
      make_eval(EmotionLabel::happiness, EmotionLabel::anger)};
  CHECK_THROWS_AS(confusion(records, narrow), Error);
}

TEST_CASE("row normalization sums to one on non-empty rows") {
  Rng rng(4242);
  constexpr auto panel = all_labels();
  const std::vector<EmotionLabel> labels(panel.begin(), panel.end());
  const auto records = random_eval_records(rng, labels, 300);
  const ConfusionMatrix cm = confusion(records, labels);
  const auto rows = cm.row_normalized();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double sum = 0.0;
    for (double v : rows[r]) sum += v;
    if (cm.row_sum(r) > 0) {
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    } else {
      CHECK(sum == 0.0);
    }
  }
}

TEST_CASE("aggregate pools records across datasets") {
  Rng rng(2718);
  std::map<DatasetId, std::vector<EvalRecord>> by_dataset;
  const std::vector<EmotionLabel> seven(label_set(DatasetId::rafdb));
  const std::vector<EmotionLabel> eight(label_set(DatasetId::ferplus));
  by_dataset[DatasetId::rafdb] = random_eval_records(rng, seven, 300, DatasetId::rafdb);
  by_dataset[DatasetId::ferplus] = random_eval_records(rng, eight, 500, DatasetId::ferplus);

  const EvalReport report = aggregate("m", by_dataset);
  CHECK(report.model == "m");
  CHECK(report.record_count == 800);
  REQUIRE(report.per_dataset.size() == 2);

  CHECK(report.overall_accuracy ==
        doctest::Approx(test::oracle_pooled_accuracy(by_dataset)).epsilon(kTight));
  // Union of a 7-label and an 8-label panel is the full 8-label set.
  CHECK(report.overall_macro_f1 ==
        doctest::Approx(test::oracle_pooled_macro_f1(
                            by_dataset, std::vector<EmotionLabel>(eight.begin(), eight.end())))
            .epsilon(kTight));

  for (const auto& ds : report.per_dataset) {
    const auto& records = by_dataset.at(ds.dataset);
    CHECK(ds.record_count == records.size());
    CHECK(ds.accuracy == doctest::Approx(oracle_accuracy(records)).epsilon(kTight));
  }

  // Pooled accuracy is the record-weighted mean of the per-dataset ones.
  const double weighted = (by_dataset[DatasetId::rafdb].size() * report.per_dataset[0].accuracy +
                           by_dataset[DatasetId::ferplus].size() * report.per_dataset[1].accuracy) /
                          800.0;
  CHECK(report.overall_accuracy == doctest::Approx(weighted).epsilon(1e-9));
}

TEST_CASE("aggregate refuses empty input") {
  CHECK_THROWS_AS(aggregate("m", {}), EmptyInput);
  std::map<DatasetId, std::vector<EvalRecord>> with_empty;
  with_empty[DatasetId::rafdb] = {};
  CHECK_THROWS_AS(aggregate("m", with_empty), EmptyInput);
}

TEST_CASE("report json round-trips") {
  Rng rng(161);
  std::map<DatasetId, std::vector<EvalRecord>> by_dataset;
  by_dataset[DatasetId::affectnet] =
      random_eval_records(rng, label_set(DatasetId::affectnet), 120, DatasetId::affectnet);
  const EvalReport report = aggregate("round/trip", by_dataset);

  const EvalReport back = EvalReport::from_json(report.to_json());
  CHECK(back.model == report.model);
  CHECK(back.record_count == report.record_count);
  CHECK(back.overall_accuracy == doctest::Approx(report.overall_accuracy).epsilon(kTight));
  CHECK(back.overall_macro_f1 == doctest::Approx(report.overall_macro_f1).epsilon(kTight));
  REQUIRE(back.per_dataset.size() == report.per_dataset.size());
  for (std::size_t i = 0; i < back.per_dataset.size(); ++i) {
    CHECK(back.per_dataset[i].dataset == report.per_dataset[i].dataset);
    CHECK(back.per_dataset[i].accuracy ==
          doctest::Approx(report.per_dataset[i].accuracy).epsilon(kTight));
    CHECK(back.per_dataset[i].confusion.counts == report.per_dataset[i].confusion.counts);
    CHECK(back.per_dataset[i].confusion.overflow == report.per_dataset[i].confusion.overflow);
  }
}

TEST_CASE("confusion csv has a header, one row per label, and a failed column") {
  const std::vector<EmotionLabel> labels = {EmotionLabel::anger, EmotionLabel::happiness};
  const std::vector<EvalRecord> records = {
      make_eval(EmotionLabel::anger, EmotionLabel::anger),
      make_eval(EmotionLabel::happiness, std::nullopt),
  };
  const std::string csv = confusion_csv(confusion(records, labels));
  CHECK(csv.find("gt,anger,happiness,failed") == 0);
  CHECK(csv.find("anger,1,0,0") != std::string::npos);
  CHECK(csv.find("happiness,0,0,1") != std::string::npos);
}

TEST_CASE("confusion svg is self-contained markup") {
  Rng rng(88);
  constexpr auto panel = all_labels();
  const std::vector<EmotionLabel> labels(panel.begin(), panel.end());
  const auto records = random_eval_records(rng, labels, 64);
  const std::string svg = confusion_svg(confusion(records, labels));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  // Nothing loads from outside: the xmlns name is the only URL-shaped text.
  CHECK(svg.find("http://", svg.find("http://") + 1) == std::string::npos);
  CHECK(svg.find("https://") == std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
  CHECK(svg.find("<script") == std::string::npos);
  CHECK(svg.find("url(") == std::string::npos);
  for (EmotionLabel l : labels) CHECK(svg.find(to_string(l)) != std::string::npos);
}

TEST_CASE("ranking orders by accuracy, then macro f1, then name") {
  EvalReport a;
  a.model = "alpha";
  a.overall_accuracy = 0.8;
  a.overall_macro_f1 = 0.7;
  EvalReport b;
  b.model = "beta";
  b.overall_accuracy = 0.9;
  b.overall_macro_f1 = 0.1;
  EvalReport c;
  c.model = "gamma";
  c.overall_accuracy = 0.8;
  c.overall_macro_f1 = 0.75;
  EvalReport d;
  d.model = "delta";
  d.overall_accuracy = 0.8;
  d.overall_macro_f1 = 0.7;

  const std::vector<EvalReport> reports = {a, b, c, d};
  const auto ranked = rank_reports(reports);
  REQUIRE(ranked.size() == 4);
  CHECK(ranked[0]->model == "beta");
  CHECK(ranked[1]->model == "gamma");
  CHECK(ranked[2]->model == "alpha");  // ties broken by name
  CHECK(ranked[3]->model == "delta");

  const std::string md = leaderboard_markdown(reports);
  CHECK(md.find("beta") < md.find("gamma"));
  CHECK(md.find("gamma") < md.find("alpha"));

  CHECK_THROWS_AS(leaderboard_json({}), NoResults);
}

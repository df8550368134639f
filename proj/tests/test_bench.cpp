// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "escalada/bench/dataset.hpp"
#include "escalada/bench/desk_corpus.hpp"
#include "escalada/bench/experiments.hpp"
#include "escalada/bench/exports.hpp"
#include "escalada/bench/misspell.hpp"
#include "escalada/bench/splits.hpp"
#include "escalada/detail/csv.hpp"
#include "escalada/spell.hpp"

namespace escalada::bench {
namespace {

LabeledDataset synthetic(std::size_t classes, std::size_t per_class, std::size_t irrelevant) {
  LabeledDataset ds;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::string label = "class" + std::to_string(c);
      ds.relevant.push_back({label + "-" + std::to_string(i), label + " question " + std::to_string(i),
                             {"top", "mid" + std::to_string(c % 2), label}});
    }
  }
  for (std::size_t i = 0; i < irrelevant; ++i) {
    ds.irrelevant.push_back({"oos-" + std::to_string(i), "unrelated thing " + std::to_string(i)});
  }
  return ds;
}

ExperimentConfig small_experiment() {
  ExperimentConfig ex;
  ex.classifier.feature_dim = 4096;
  ex.classifier.hidden_units = 32;
  ex.classifier.epochs = 8;
  ex.mc_samples = 10;
  ex.seed = 3;
  return ex;
}

const LabeledDataset& small_desk() {
  static const LabeledDataset ds = make_desk_corpus({15, 60, 11});
  return ds;
}

TEST(DatasetCsv, SplitsRelevantAndIrrelevant) {
  std::istringstream in(
      "text,label\n"
      "\"how do I reset my pin, please\",card_pin\n"
      "what is my balance,balance\n"
      "tell me a joke,__oos__\n");
  const auto ds = load_dataset_csv(in);
  ASSERT_EQ(ds.relevant.size(), 2u);
  ASSERT_EQ(ds.irrelevant.size(), 1u);
  EXPECT_EQ(ds.relevant[0].text, "how do I reset my pin, please");
  EXPECT_EQ(ds.relevant[1].label.tier3, "balance");
  EXPECT_EQ(ds.irrelevant[0].text, "tell me a joke");
}

TEST(DatasetCsv, UnknownColumnIsNamed) {
  std::istringstream in("text,label,colour\na,b,c\n");
  try {
    load_dataset_csv(in);
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
}

TEST(DatasetCsv, TierNestingViolation) {
  std::istringstream in(
      "text,tier1,tier2,tier3\n"
      "a,bank,cards,pin\n"
      "b,bank,loans,pin\n");
  try {
    load_dataset_csv(in);
    FAIL() << "expected InvariantViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvariantViolation);
  }
}

TEST(DatasetCsv, RoundTrip) {
  const auto& ds = small_desk();
  std::stringstream buf;
  write_dataset_csv(buf, ds);
  const auto back = load_dataset_csv(buf);
  ASSERT_EQ(back.relevant.size(), ds.relevant.size());
  ASSERT_EQ(back.irrelevant.size(), ds.irrelevant.size());
  for (std::size_t i = 0; i < ds.relevant.size(); ++i) {
    EXPECT_EQ(back.relevant[i].id, ds.relevant[i].id);
    EXPECT_EQ(back.relevant[i].text, ds.relevant[i].text);
    EXPECT_EQ(back.relevant[i].label, ds.relevant[i].label);
  }
}

TEST(DatasetJson, SectionedFormatCountsLabels) {
  std::istringstream in(R"({
    "train": [["what is my balance", "balance"], ["reset my pin", "pin"]],
    "val": [["show the balance", "balance"]],
    "test": [["transfer money", "transfer"]],
    "oos_train": [["tell me a joke", "oos"]],
    "oos_test": [["who won the game", "oos"]]
  })");
  const auto ds = load_dataset_json(in);
  EXPECT_EQ(ds.relevant.size(), 4u);
  EXPECT_EQ(ds.irrelevant.size(), 2u);
  EXPECT_EQ(ds.label_space().size(), 3u);
}

TEST(DatasetJson, DuplicateTextIsAWarning) {
  std::istringstream in(R"([{"text": "hi", "label": "a"}, {"text": "hi", "label": "b"}])");
  const auto ds = load_dataset_json(in);
  EXPECT_FALSE(ds.warnings.empty());
}

TEST(DeskCorpus, DeterministicAndUnique) {
  const auto a = make_desk_corpus({10, 20, 5});
  const auto b = make_desk_corpus({10, 20, 5});
  ASSERT_EQ(a.relevant.size(), b.relevant.size());
  std::set<std::string> texts;
  for (std::size_t i = 0; i < a.relevant.size(); ++i) {
    EXPECT_EQ(a.relevant[i].text, b.relevant[i].text);
    texts.insert(a.relevant[i].text);
  }
  for (const auto& s : a.irrelevant) texts.insert(s.text);
  EXPECT_EQ(texts.size(), a.relevant.size() + a.irrelevant.size());
  EXPECT_EQ(a.irrelevant.size(), 20u);
  EXPECT_EQ(a.label_space().size(), desk_intents().size());
}

TEST(Splits, SizesFollowTheNestedProtocol) {
  const auto ds = synthetic(5, 20, 50);
  const auto plan = make_splits(ds, 1);
  EXPECT_TRUE(plan.stratified);
  EXPECT_EQ(plan.relevant_with(Role::Train).size(), 80u);
  EXPECT_EQ(plan.relevant_with(Role::ThresholdLearn).size(), 16u);
  EXPECT_EQ(plan.relevant_with(Role::Test).size(), 4u);
  EXPECT_EQ(plan.irrelevant_with(Role::ThresholdLearn).size(), 40u);
  EXPECT_EQ(plan.irrelevant_with(Role::Test).size(), 10u);

  // Stratified: every class loses exactly one fifth to the held-out fold.
  const auto classes = ds.class_indices();
  std::map<std::size_t, std::size_t> held;
  for (std::size_t i = 0; i < ds.relevant.size(); ++i) {
    if (plan.relevant_role[i] != Role::Train) ++held[classes[i]];
  }
  for (const auto& [c, n] : held) EXPECT_EQ(n, 4u) << c;
}

TEST(Splits, DeterministicPerSeed) {
  const auto ds = synthetic(4, 25, 30);
  EXPECT_EQ(make_splits(ds, 9), make_splits(ds, 9));
  EXPECT_NE(make_splits(ds, 9).relevant_role, make_splits(ds, 10).relevant_role);
}

TEST(Splits, NoLeakageAcrossSeeds) {
  const auto& ds = small_desk();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto plan = make_splits(ds, seed);
    EXPECT_NO_THROW(check_no_leakage(ds, plan));
    std::size_t covered = plan.relevant_with(Role::Train).size() + plan.relevant_with(Role::ThresholdLearn).size() +
                          plan.relevant_with(Role::Test).size();
    EXPECT_EQ(covered, ds.relevant.size());
  }
}

TEST(Splits, LeakageIsDetected) {
  auto ds = synthetic(5, 20, 50);
  const auto plan = make_splits(ds, 1);
  const auto test = plan.relevant_with(Role::Test);
  const auto train = plan.relevant_with(Role::Train);
  ds.relevant[train[0]].id = ds.relevant[test[0]].id;
  EXPECT_THROW(check_no_leakage(ds, plan), Error);
}

TEST(Splits, TooFewSamples) {
  try {
    make_splits(synthetic(2, 10, 50), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewSamples);
  }
  try {
    make_splits(synthetic(5, 20, 4), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewSamples);
  }
}

TEST(Splits, SmallClassesFallBackWithWarning) {
  auto ds = synthetic(5, 20, 50);
  ds.relevant.push_back({"rare-0", "rare question", {"top", "mid0", "rare"}});
  ds.relevant.push_back({"rare-1", "rare question two", {"top", "mid0", "rare"}});
  const auto plan = make_splits(ds, 2);
  EXPECT_FALSE(plan.stratified);
  EXPECT_FALSE(plan.warnings.empty());
}

TEST(Subsample, DeterministicSortedSubset) {
  std::vector<std::size_t> pool{3, 5, 8, 13, 21, 34, 55};
  const auto a = subsample(pool, 4, 17);
  EXPECT_EQ(a, subsample(pool, 4, 17));
  EXPECT_EQ(a.size(), 4u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  for (auto v : a) EXPECT_NE(std::find(pool.begin(), pool.end(), v), pool.end());
  EXPECT_EQ(subsample(pool, 100, 1).size(), pool.size());
}

TEST(Misspell, LongestWordIsAltered) {
  const auto m = gen_misspellings("what is a hippopotamus", 1, 7);
  ASSERT_EQ(m.altered_words, std::vector<std::size_t>{3});
  const auto words = escalada::detail::split_whitespace(m.text);
  EXPECT_NE(words[3], "hippopotamus");
  EXPECT_EQ(words[0], "what");
  auto sorted = words[3];
  std::string orig = "hippopotamus";
  std::sort(sorted.begin(), sorted.end());
  std::sort(orig.begin(), orig.end());
  EXPECT_EQ(sorted, orig);
}

TEST(Misspell, PropertiesOverManySentences) {
  const auto& ds = small_desk();
  std::size_t checked = 0;
  for (std::size_t i = 0; i < ds.relevant.size(); i += 3) {
    const auto& text = ds.relevant[i].text;
    for (std::size_t count = 1; count <= 3; ++count) {
      Misspelling m;
      try {
        m = gen_misspellings(text, count, i * 31 + count);
      } catch (const Error& e) {
        ASSERT_EQ(e.kind(), ErrorKind::NotEnoughWords);
        continue;
      }
      ++checked;
      const auto before = escalada::detail::split_whitespace(text);
      const auto after = escalada::detail::split_whitespace(m.text);
      ASSERT_EQ(before.size(), after.size());
      EXPECT_EQ(m.altered_words.size(), count);
      std::size_t differing = 0;
      for (std::size_t w = 0; w < before.size(); ++w) {
        if (before[w] == after[w]) continue;
        ++differing;
        EXPECT_LE(damerau_levenshtein(before[w], after[w]), 2u);
        EXPECT_TRUE(std::binary_search(m.altered_words.begin(), m.altered_words.end(), w));
      }
      EXPECT_EQ(differing, count) << text << " -> " << m.text;
      EXPECT_EQ(m.text, gen_misspellings(text, count, i * 31 + count).text);
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST(Misspell, SkipsAllCapsAndDigits) {
  const auto m = gen_misspellings("IRA 401k to my roth", 1, 0);
  const auto words = escalada::detail::split_whitespace(m.text);
  EXPECT_EQ(words[0], "IRA");
  EXPECT_EQ(words[1], "401k");
  EXPECT_THROW(gen_misspellings("IRA 401k", 1, 0), Error);
  EXPECT_THROW(gen_misspellings("hello there", 0, 0), Error);
}

TEST(Parallel, ResultsIndependentOfJobs) {
  std::vector<std::size_t> a(1000), b(1000);
  parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = i * i; });
  parallel_for(b.size(), 7, [&](std::size_t i) { b[i] = i * i; });
  EXPECT_EQ(a, b);
  EXPECT_THROW(parallel_for(100, 4, [](std::size_t i) {
                 if (i == 63) throw Error(ErrorKind::BadConfig, "boom");
               }),
               Error);
}

TEST(Experiments, DummyClassModelHasKPlusOneClasses) {
  const auto& ds = small_desk();
  const auto plan = make_splits(ds, 0);
  const auto classes = ds.class_indices();
  const auto names = ds.label_space();
  auto cfg = small_experiment().classifier;
  const auto model = train_classifier(ds, classes, names, plan.relevant_with(Role::Train),
                                      plan.irrelevant_with(Role::ThresholdLearn), cfg);
  EXPECT_EQ(model.k(), names.size() + 1);
  EXPECT_EQ(model.label_names().back(), kEscalationClassName);
}

TEST(Experiments, ComparisonReportIsConsistent) {
  const auto& ds = small_desk();
  const auto plan = make_splits(ds, 0);
  auto ex = small_experiment();
  ex.irrelevant_counts = {10, 1000};
  ex.jobs = 3;
  const auto report = run_method_comparison(ds, plan, ex);
  ASSERT_EQ(report.rows.size(), 6u);
  EXPECT_EQ(report.k, ds.label_space().size());
  EXPECT_EQ(report.rows.back().irrelevant_count, report.threshold_irrelevant_pool);
  for (const auto& r : report.rows) {
    EXPECT_EQ(r.counts.relevant(), report.test_relevant);
    EXPECT_EQ(r.counts.irrelevant(), report.test_irrelevant);
    EXPECT_GE(r.f1(), 0.0);
    EXPECT_LE(r.f1(), 1.0);
  }

  // Same seed, different job count: identical report.
  ex.jobs = 1;
  const auto again = run_method_comparison(ds, plan, ex);
  ASSERT_EQ(again.rows.size(), report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    EXPECT_EQ(again.rows[i].counts, report.rows[i].counts);
    EXPECT_EQ(again.rows[i].policy.b, report.rows[i].policy.b);
    EXPECT_EQ(again.rows[i].policy.c, report.rows[i].policy.c);
  }

  // F1 recomputes from the exported counts.
  std::stringstream csv;
  write_report_csv(csv, report);
  escalada::detail::CsvReader reader(csv);
  std::vector<std::string> header, fields;
  ASSERT_TRUE(reader.next(header));
  auto col = [&](const char* name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  std::size_t n = 0;
  while (reader.next(fields)) {
    const double rc = std::stod(fields[col("relevant_correct")]);
    const double rw = std::stod(fields[col("relevant_wrong")]);
    const double re = std::stod(fields[col("relevant_escalated")]);
    const double ia = std::stod(fields[col("irrelevant_answered")]);
    const double p = (rc + rw) / (rc + rw + ia);
    const double r = (rc + rw) / (rc + rw + re);
    EXPECT_NEAR(std::stod(fields[col("f1")]), 2 * p * r / (p + r), 1e-12);
    ++n;
  }
  EXPECT_EQ(n, report.rows.size());

  const auto j = report_to_json(report);
  EXPECT_EQ(j["rows"].size(), report.rows.size());
  EXPECT_EQ(j["rows"][0]["policy"]["mode"], "entropy");
}

TEST(Experiments, SpellAblationShape) {
  const auto& ds = small_desk();
  const auto plan = make_splits(ds, 0);
  SpellAblationConfig cfg;
  cfg.experiment = small_experiment();
  cfg.experiment.jobs = 4;
  cfg.completion.m = cfg.completion.b = 50;
  const auto rows = run_spell_ablation(ds, plan, cfg);
  std::size_t beam_rows = 0;
  std::map<std::size_t, std::size_t> evaluated;
  for (const auto& r : rows) {
    if (r.setting == "ngram-beam") {
      ++beam_rows;
      EXPECT_EQ(r.oov_count, 2u);
    }
    if (evaluated.contains(r.oov_count)) {
      EXPECT_EQ(evaluated[r.oov_count], r.evaluated);
    }
    evaluated[r.oov_count] = r.evaluated;
    EXPECT_LE(r.correct, r.evaluated);
  }
  EXPECT_EQ(beam_rows, 5u);
  EXPECT_EQ(evaluated.size(), 3u);
  EXPECT_GT(evaluated[1], 0u);
}

TEST(Exports, HistogramBinsAndClamping) {
  const std::vector<double> v{0.0, 0.1, 0.5, 0.99, 1.0, 2.0, -1.0};
  const auto h = make_histogram(v, 4, 0.0, 1.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{3, 0, 1, 3}));
  EXPECT_THROW(make_histogram(v, 0, 0.0, 1.0), Error);
  std::vector<NamedSeries> series{{"a", {0.0, 1.0}}, {"b", {0.5}}};
  std::ostringstream os;
  write_histogram_csv(os, series, 2);
  EXPECT_EQ(os.str(), "series,bin_lo,bin_hi,count\na,0,0.5,1\na,0.5,1,1\nb,0,0.5,0\nb,0.5,1,1\n");
}

TEST(Exports, PlotDataCoversEverySeries) {
  const auto& ds = small_desk();
  const auto plan = make_splits(ds, 0);
  PlotConfig cfg;
  cfg.experiment = small_experiment();
  cfg.grid_steps = 11;
  cfg.dropout_ratios = {0.1, 0.5};
  const auto data = compute_plot_data(ds, plan, cfg);
  EXPECT_EQ(data.entropy.size(), 2u);
  EXPECT_EQ(data.dropout_std.size(), 4u);
  EXPECT_EQ(data.grid.points.size(), 121u);
  EXPECT_EQ(data.delta_sweep.size(), cfg.deltas.size());
  for (std::size_t i = 1; i < data.delta_sweep.size(); ++i) {
    EXPECT_GE(data.delta_sweep[i].escalated_count, data.delta_sweep[i - 1].escalated_count);
  }
}

}  // namespace
}  // namespace escalada::bench

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "escalada/classifier.hpp"
#include "escalada/prediction_dump.hpp"
#include "test_support.hpp"

namespace escalada {
namespace {

std::vector<LabeledText> toy_corpus() {
  const std::vector<std::string> money{"check my balance",     "show account balance", "how much money do i have",
                                       "balance on savings",   "current balance please", "what is my balance",
                                       "money left in account", "savings balance today", "checking balance now",
                                       "remaining money"};
  const std::vector<std::string> card{"block my card",      "my card was stolen", "freeze the credit card",
                                      "lost my debit card",  "cancel card now",    "card stolen yesterday",
                                      "stop my card",        "report lost card",   "card missing",
                                      "freeze debit card"};
  std::vector<LabeledText> out;
  for (const auto& t : money) out.push_back({t, 0});
  for (const auto& t : card) out.push_back({t, 1});
  return out;
}

BowClassifierConfig small_config() {
  BowClassifierConfig c;
  c.feature_dim = 1024;
  c.hidden_units = 32;
  c.epochs = 50;
  c.seed = 7;
  return c;
}

double row_sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(BowClassifier, OverfitsSeparableToySet) {
  const auto corpus = toy_corpus();
  const auto model = BowClassifier::train(corpus, {"balance", "card"}, small_config());
  std::size_t correct = 0;
  for (const auto& ex : corpus) {
    const auto p = model.predict(ex.text);
    if (argmax(p) == ex.label) ++correct;
  }
  EXPECT_EQ(correct, corpus.size());
}

TEST(BowClassifier, SameSeedGivesBitwiseIdenticalWeights) {
  const auto corpus = toy_corpus();
  const auto a = BowClassifier::train(corpus, {"balance", "card"}, small_config());
  const auto b = BowClassifier::train(corpus, {"balance", "card"}, small_config());
  EXPECT_TRUE(std::ranges::equal(a.input_weights(), b.input_weights()));
  EXPECT_TRUE(std::ranges::equal(a.output_weights(), b.output_weights()));

  auto other = small_config();
  other.seed = 8;
  const auto c = BowClassifier::train(corpus, {"balance", "card"}, other);
  EXPECT_FALSE(std::ranges::equal(a.input_weights(), c.input_weights()));
}

TEST(BowClassifier, ConfigValidation) {
  const auto corpus = toy_corpus();
  auto bad = small_config();
  bad.epochs = 0;
  try {
    BowClassifier::train(corpus, {"balance", "card"}, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadConfig);
  }
  bad = small_config();
  bad.dropout_ratio = 1.0;
  EXPECT_THROW(BowClassifier::train(corpus, {"balance", "card"}, bad), Error);
  bad = small_config();
  bad.feature_dim = 1000;
  EXPECT_THROW(BowClassifier::train(corpus, {"balance", "card"}, bad), Error);
}

TEST(BowClassifier, EmptyClassRejected) {
  const auto corpus = toy_corpus();
  try {
    BowClassifier::train(corpus, {"balance", "card", "transfer"}, small_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
  }
}

TEST(BowClassifier, PredictIsAlwaysADistribution) {
  const auto model = BowClassifier::train(toy_corpus(), {"balance", "card"}, small_config());
  for (const std::string text : {"", "zebra quantum", "balance card balance", "!!!", "card"}) {
    const auto p = model.predict(text);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NEAR(row_sum(p), 1.0, 1e-6);
    EXPECT_TRUE(std::all_of(p.begin(), p.end(), [](double x) { return x >= 0.0; }));
  }
}

TEST(BowClassifier, McPredictShapeAndDeterminism) {
  auto cfg = small_config();
  cfg.dropout_ratio = 0.1;
  const auto model = BowClassifier::train(toy_corpus(), {"balance", "card"}, cfg);
  const auto a = model.mc_predict("my card is lost", 100, 42);
  const auto b = model.mc_predict("my card is lost", 100, 42);
  ASSERT_EQ(a.s(), 100u);
  for (const auto& row : a.samples) {
    ASSERT_EQ(row.size(), 2u);
    EXPECT_NEAR(row_sum(row), 1.0, 1e-6);
  }
  EXPECT_EQ(a.samples, b.samples);
  const auto c = model.mc_predict("my card is lost", 100, 43);
  EXPECT_NE(a.samples, c.samples);
}

TEST(BowClassifier, ZeroDropoutHasNoSpread) {
  auto cfg = small_config();
  cfg.dropout_ratio = 0.0;
  const auto model = BowClassifier::train(toy_corpus(), {"balance", "card"}, cfg);
  const auto mc = model.mc_predict("balance please", 100, 1);
  for (const auto& row : mc.samples) EXPECT_EQ(row, mc.samples.front());
  const auto stats = aggregate_mc(mc);
  for (double sd : stats.std_devs) EXPECT_EQ(sd, 0.0);
  EXPECT_EQ(stats.mean_probs, model.predict("balance please"));
}

TEST(BowClassifier, HighDropoutHasPositiveSpread) {
  auto cfg = small_config();
  cfg.dropout_ratio = 0.5;
  const auto model = BowClassifier::train(toy_corpus(), {"balance", "card"}, cfg);
  std::vector<UncertaintyStats> stats;
  for (const auto& ex : toy_corpus()) stats.push_back(aggregate_mc(model.mc_predict(ex.text, 100, 3)));
  EXPECT_GT(mean_std_over(stats), 0.0);
}

TEST(BowClassifier, SaveLoadRoundTrip) {
  const auto model = BowClassifier::train(toy_corpus(), {"balance", "card"}, small_config());
  std::stringstream buf;
  model.save(buf);
  const auto back = BowClassifier::load(buf);
  EXPECT_EQ(back.label_names(), model.label_names());
  EXPECT_TRUE(std::ranges::equal(back.input_weights(), model.input_weights()));
  EXPECT_EQ(back.predict("stolen card"), model.predict("stolen card"));
  EXPECT_EQ(back.mc_predict("stolen card", 10, 5).samples, model.mc_predict("stolen card", 10, 5).samples);

  std::stringstream junk("not a model at all");
  EXPECT_THROW(BowClassifier::load(junk), Error);
}

TEST(PredictionDump, LoadsValidFile) {
  std::stringstream in(
      R"({"id":"a","label":"card","probs":[0.1,0.9]}
{"id":"b","label":"__oos__","probs":[0.5,0.5]}
{"id":"c","label":"balance","probs":[0.7,0.3]}
)");
  const std::vector<std::string> names{"balance", "card"};
  const auto dump = load_prediction_dump(in, names);
  ASSERT_EQ(dump.set.rows.size(), 3u);
  EXPECT_EQ(dump.set.k, 2u);
  EXPECT_EQ(dump.set.rows[0].true_label, ClassLabel{1});
  EXPECT_EQ(dump.set.rows[1].true_label, kIrrelevant);
  EXPECT_TRUE(dump.mc.empty());
}

TEST(PredictionDump, IndexLabelsWithoutNames) {
  std::stringstream in(R"({"id":"a","label":"1","probs":[0.1,0.9]})");
  const auto dump = load_prediction_dump(in);
  EXPECT_EQ(dump.set.rows[0].true_label, ClassLabel{1});
  std::stringstream bad(R"({"id":"a","label":"card","probs":[0.1,0.9]})");
  EXPECT_THROW(load_prediction_dump(bad), Error);
}

TEST(PredictionDump, RejectsBadRowsWithContext) {
  std::stringstream short_sum(R"({"id":"a","label":"0","probs":[0.5,0.5]}
{"id":"bad-row","label":"0","probs":[0.5,0.3]})");
  try {
    load_prediction_dump(short_sum);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvariantViolation);
    EXPECT_NE(std::string(e.what()).find("bad-row"), std::string::npos);
  }

  std::stringstream broken(R"({"id":"a","label":"0","probs":[0.5,0.5]}
{"id":"b","label":"0","probs":[0.5,)");
  try {
    load_prediction_dump(broken);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }

  std::stringstream missing(R"({"id":"a","probs":[0.5,0.5]})");
  EXPECT_THROW(load_prediction_dump(missing), Error);
}

TEST(PredictionDump, WriteThenLoadRoundTripsExactly) {
  detail::Rng rng(99);
  PredictionSet set;
  set.k = 3;
  set.label_names = {"x", "y", "z"};
  std::vector<McSampleSet> mc;
  for (int i = 0; i < 25; ++i) {
    McSampleSet m{"q" + std::to_string(i), {}};
    for (int s = 0; s < 4; ++s) {
      std::vector<double> p{rng.uniform() + 0.01, rng.uniform() + 0.01, rng.uniform() + 0.01};
      const double sum = row_sum(p);
      for (auto& x : p) x /= sum;
      m.samples.push_back(p);
    }
    const auto stats = aggregate_mc(m);
    set.rows.push_back({m.sample_id, i % 4 == 0 ? kIrrelevant : ClassLabel{static_cast<std::size_t>(i % 3)},
                        stats.mean_probs});
    mc.push_back(std::move(m));
  }
  std::stringstream buf;
  write_prediction_dump(buf, set, mc);
  const auto back = load_prediction_dump(buf, set.label_names);
  ASSERT_EQ(back.set.rows.size(), set.rows.size());
  for (std::size_t i = 0; i < set.rows.size(); ++i) {
    EXPECT_EQ(back.set.rows[i].sample_id, set.rows[i].sample_id);
    EXPECT_EQ(back.set.rows[i].true_label, set.rows[i].true_label);
    EXPECT_EQ(back.set.rows[i].probs, set.rows[i].probs);
    EXPECT_EQ(back.mc[i].samples, mc[i].samples);
  }
}

TEST(ReplayBackend, ServesStoredRows) {
  PredictionSet set{2, {"a", "b"}, {{"q1", 0, {0.8, 0.2}}}};
  std::vector<McSampleSet> mc{{"q1", {{0.7, 0.3}, {0.9, 0.1}, {0.8, 0.2}}}};
  ReplayBackend backend(set, mc);
  EXPECT_EQ(backend.k(), 2u);
  EXPECT_EQ(backend.predict("q1"), (std::vector<double>{0.8, 0.2}));
  EXPECT_EQ(backend.mc_predict("q1", 2, 0).s(), 2u);
  EXPECT_THROW(backend.predict("missing"), Error);
}

}  // namespace
}  // namespace escalada

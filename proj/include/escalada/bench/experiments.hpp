// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file experiments.hpp
 * @brief Method comparison and spelling-robustness runs on a LabeledDataset.
 *
 * Entropy and dropout policies use a classifier trained on relevant questions
 * only; their thresholds are learned on the threshold pool and scored on the
 * test pool. The dummy-class policy trains a (K+1)-class model with
 * irrelevant questions as the extra class.
 */

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "escalada/bench/dataset.hpp"
#include "escalada/bench/misspell.hpp"
#include "escalada/bench/parallel.hpp"
#include "escalada/bench/splits.hpp"
#include "escalada/classifier.hpp"
#include "escalada/detail/rng.hpp"
#include "escalada/escalation.hpp"
#include "escalada/lm.hpp"
#include "escalada/metrics.hpp"
#include "escalada/prediction.hpp"
#include "escalada/spell.hpp"

namespace escalada::bench {

inline constexpr std::string_view kEscalationClassName = "__escalate__";

struct ExperimentConfig {
  BowClassifierConfig classifier = [] {
    BowClassifierConfig c;
    c.epochs = 30;
    return c;
  }();
  std::size_t mc_samples = 100;
  double delta = kDefaultDelta;
  /// Irrelevant questions used per run; empty means the whole threshold pool.
  std::vector<std::size_t> irrelevant_counts;
  std::vector<PolicyMode> methods{PolicyMode::Entropy, PolicyMode::Dropout, PolicyMode::DummyClass};
  int tier = 3;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

/// Texts, ids and ground truth of one evaluation pool.
struct Pool {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  std::vector<ClassLabel> labels;

  std::size_t size() const noexcept { return ids.size(); }
};

inline Pool make_pool(const LabeledDataset& ds, std::span<const std::size_t> classes,
                      std::span<const std::size_t> relevant, std::span<const std::size_t> irrelevant) {
  Pool p;
  for (std::size_t i : relevant) {
    p.ids.push_back(ds.relevant[i].id);
    p.texts.push_back(ds.relevant[i].text);
    p.labels.emplace_back(classes[i]);
  }
  for (std::size_t i : irrelevant) {
    p.ids.push_back(ds.irrelevant[i].id);
    p.texts.push_back(ds.irrelevant[i].text);
    p.labels.emplace_back(kIrrelevant);
  }
  return p;
}

/// Deterministic stats (mc_samples == 0) or MC-dropout stats per text. Each
/// text gets its own derived seed, so results do not depend on `jobs`.
inline std::vector<UncertaintyStats> score_pool(const ClassifierBackend& model, const Pool& pool,
                                                std::size_t mc_samples, std::uint64_t seed, std::size_t jobs) {
  std::vector<UncertaintyStats> out(pool.size());
  parallel_for(pool.size(), jobs, [&](std::size_t i) {
    if (mc_samples == 0) {
      PredictionRow row{pool.ids[i], pool.labels[i], model.predict(pool.texts[i])};
      out[i] = stats_from_probs(row);
    } else {
      auto mc = model.mc_predict(pool.texts[i], mc_samples, escalada::detail::derive_seed(seed, i));
      mc.sample_id = pool.ids[i];
      out[i] = aggregate_mc(mc);
    }
  });
  return out;
}

/// Trains on the given relevant rows; `dummy_rows` (irrelevant indices) become
/// an extra trailing class when non-empty.
inline BowClassifier train_classifier(const LabeledDataset& ds, std::span<const std::size_t> classes,
                                      std::vector<std::string> label_names, std::span<const std::size_t> relevant,
                                      std::span<const std::size_t> dummy_rows, BowClassifierConfig config) {
  std::vector<LabeledText> corpus;
  corpus.reserve(relevant.size() + dummy_rows.size());
  for (std::size_t i : relevant) corpus.push_back({ds.relevant[i].text, classes[i]});
  if (!dummy_rows.empty()) {
    const std::size_t k = label_names.size();
    label_names.emplace_back(kEscalationClassName);
    for (std::size_t i : dummy_rows) corpus.push_back({ds.irrelevant[i].text, k});
  }
  return BowClassifier::train(corpus, std::move(label_names), config);
}

struct MethodRow {
  PolicyMode method = PolicyMode::Entropy;
  std::size_t irrelevant_count = 0;
  ThresholdPolicy policy;
  double threshold_objective = 0.0;  // loss on the threshold pool; 0 for the dummy class
  ConfusionCounts counts;            // on the test pool

  double mean_accuracy() const { return counts.class_accuracy(); }
  double escalation_accuracy() const { return counts.escalation_accuracy(); }
  double precision() const { return counts.precision(); }
  double recall() const { return counts.recall(); }
  double f1() const { return counts.f1(); }
};

struct ComparisonReport {
  std::size_t k = 0;
  int tier = 3;
  double delta = kDefaultDelta;
  std::size_t train_relevant = 0;
  std::size_t threshold_relevant = 0;
  std::size_t threshold_irrelevant_pool = 0;
  std::size_t test_relevant = 0;
  std::size_t test_irrelevant = 0;
  std::vector<MethodRow> rows;
  std::vector<std::string> notes;
};

inline ComparisonReport run_method_comparison(const LabeledDataset& ds, const SplitPlan& plan,
                                              const ExperimentConfig& config) {
  using escalada::detail::derive_seed;
  check_no_leakage(ds, plan);
  const auto classes = ds.class_indices(config.tier);
  const auto names = ds.label_space(config.tier);
  const auto train_rel = plan.relevant_with(Role::Train);
  const auto thr_rel = plan.relevant_with(Role::ThresholdLearn);
  const auto test_rel = plan.relevant_with(Role::Test);
  const auto thr_irr = plan.irrelevant_with(Role::ThresholdLearn);
  const auto test_irr = plan.irrelevant_with(Role::Test);

  ComparisonReport report;
  report.k = names.size();
  report.tier = config.tier;
  report.delta = config.delta;
  report.train_relevant = train_rel.size();
  report.threshold_relevant = thr_rel.size();
  report.threshold_irrelevant_pool = thr_irr.size();
  report.test_relevant = test_rel.size();
  report.test_irrelevant = test_irr.size();
  report.notes.push_back("irrelevant counts subsample the threshold pool uniformly with the run seed");
  report.notes.insert(report.notes.end(), plan.warnings.begin(), plan.warnings.end());

  std::vector<std::size_t> counts = config.irrelevant_counts;
  if (counts.empty()) counts.push_back(thr_irr.size());
  for (auto& c : counts) {
    if (c > thr_irr.size()) {
      report.notes.push_back("irrelevant count " + std::to_string(c) + " capped at pool size " +
                             std::to_string(thr_irr.size()));
      c = thr_irr.size();
    }
  }

  const Pool test_pool = make_pool(ds, classes, test_rel, test_irr);
  const bool want_entropy =
      std::find(config.methods.begin(), config.methods.end(), PolicyMode::Entropy) != config.methods.end();
  const bool want_dropout =
      std::find(config.methods.begin(), config.methods.end(), PolicyMode::Dropout) != config.methods.end();
  const bool want_dummy =
      std::find(config.methods.begin(), config.methods.end(), PolicyMode::DummyClass) != config.methods.end();

  std::optional<BowClassifier> base;
  std::vector<UncertaintyStats> test_det, test_mc;
  if (want_entropy || want_dropout) {
    auto cfg = config.classifier;
    cfg.seed = derive_seed(config.seed, "classifier");
    base.emplace(train_classifier(ds, classes, names, train_rel, {}, cfg));
    if (want_entropy) test_det = score_pool(*base, test_pool, 0, 0, config.jobs);
    if (want_dropout) test_mc = score_pool(*base, test_pool, config.mc_samples, derive_seed(config.seed, "mc/test"), config.jobs);
  }
  std::vector<UncertaintyStats> thr_irr_det, thr_irr_mc;
  std::vector<UncertaintyStats> thr_rel_det, thr_rel_mc;
  if (base) {
    const Pool rel_pool = make_pool(ds, classes, thr_rel, {});
    const Pool irr_pool = make_pool(ds, classes, {}, thr_irr);
    if (want_entropy) {
      thr_rel_det = score_pool(*base, rel_pool, 0, 0, config.jobs);
      thr_irr_det = score_pool(*base, irr_pool, 0, 0, config.jobs);
    }
    if (want_dropout) {
      thr_rel_mc = score_pool(*base, rel_pool, config.mc_samples, derive_seed(config.seed, "mc/threshold-rel"), config.jobs);
      thr_irr_mc = score_pool(*base, irr_pool, config.mc_samples, derive_seed(config.seed, "mc/threshold-irr"), config.jobs);
    }
  }

  for (std::size_t count : counts) {
    // Positions within the threshold irrelevant pool.
    std::vector<std::size_t> positions(thr_irr.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    const auto picked = subsample(positions, count, derive_seed(config.seed, "irrelevant/" + std::to_string(count)));

    std::vector<ClassLabel> labels;
    for (std::size_t i : thr_rel) labels.emplace_back(classes[i]);
    labels.resize(labels.size() + picked.size(), kIrrelevant);
    const auto loss = build_loss_labels(labels, report.k, config.delta);

    auto assemble = [&](const std::vector<UncertaintyStats>& rel, const std::vector<UncertaintyStats>& irr) {
      std::vector<UncertaintyStats> out = rel;
      for (std::size_t p : picked) out.push_back(irr[p]);
      return out;
    };

    for (PolicyMode method : config.methods) {
      MethodRow row;
      row.method = method;
      row.irrelevant_count = picked.size();
      if (method == PolicyMode::Entropy) {
        const auto stats = assemble(thr_rel_det, thr_irr_det);
        const auto sol = solve_entropy_threshold(stats, loss);
        row.policy = ThresholdPolicy::entropy(sol.b, report.k, config.delta);
        row.threshold_objective = sol.objective;
        row.counts = tally(decide_all(row.policy, test_det), test_pool.labels);
      } else if (method == PolicyMode::Dropout) {
        const auto stats = assemble(thr_rel_mc, thr_irr_mc);
        const auto sol = solve_dropout_thresholds(stats, loss);
        row.policy = ThresholdPolicy::dropout(sol.c, sol.d, report.k, config.delta);
        row.threshold_objective = sol.objective;
        row.counts = tally(decide_all(row.policy, test_mc), test_pool.labels);
      } else {
        std::vector<std::size_t> dummy_rows;
        for (std::size_t p : picked) dummy_rows.push_back(thr_irr[p]);
        if (dummy_rows.empty()) {
          report.notes.push_back("dummy class skipped at irrelevant count 0");
          continue;
        }
        auto cfg = config.classifier;
        cfg.seed = derive_seed(config.seed, "dummy/" + std::to_string(count));
        const auto model = train_classifier(ds, classes, names, train_rel, dummy_rows, cfg);
        const auto stats = score_pool(model, test_pool, 0, 0, config.jobs);
        row.policy = ThresholdPolicy::dummy(report.k, config.delta);
        row.counts = tally(decide_all(row.policy, stats), test_pool.labels);
      }
      report.rows.push_back(row);
    }
  }
  (void)want_dummy;
  return report;
}

/// Mean argmax-class std of MC predictions on held-out relevant questions and
/// on irrelevant questions, for a relevant-only model.
struct UncertaintyDirection {
  double in_scope_std = 0.0;
  double out_of_scope_std = 0.0;
  std::size_t in_scope = 0;
  std::size_t out_of_scope = 0;
};

inline UncertaintyDirection measure_uncertainty_direction(const LabeledDataset& ds, const SplitPlan& plan,
                                                          const ExperimentConfig& config) {
  using escalada::detail::derive_seed;
  const auto classes = ds.class_indices(config.tier);
  const auto names = ds.label_space(config.tier);
  auto cfg = config.classifier;
  cfg.seed = derive_seed(config.seed, "classifier");
  const auto model = train_classifier(ds, classes, names, plan.relevant_with(Role::Train), {}, cfg);
  auto held_out = plan.relevant_with(Role::ThresholdLearn);
  const auto test_rel = plan.relevant_with(Role::Test);
  held_out.insert(held_out.end(), test_rel.begin(), test_rel.end());
  std::sort(held_out.begin(), held_out.end());
  std::vector<std::size_t> irr(ds.irrelevant.size());
  for (std::size_t i = 0; i < irr.size(); ++i) irr[i] = i;

  const auto rel_stats = score_pool(model, make_pool(ds, classes, held_out, {}), config.mc_samples,
                                    derive_seed(config.seed, "mc/direction-rel"), config.jobs);
  const auto irr_stats = score_pool(model, make_pool(ds, classes, {}, irr), config.mc_samples,
                                    derive_seed(config.seed, "mc/direction-irr"), config.jobs);
  return {mean_std_over(rel_stats), mean_std_over(irr_stats), rel_stats.size(), irr_stats.size()};
}

struct SpellAblationConfig {
  ExperimentConfig experiment;
  std::vector<std::size_t> oov_counts{1, 2, 3};
  CompletionConfig completion;
  NgramConfig ngram;
  std::vector<std::size_t> beam_sizes{1, 10, 100, 1000, 4000};
  std::size_t beam_sweep_oov_count = 2;
};

struct SpellAblationRow {
  std::string setting;  // clean | uncorrected | no-lm | ngram | file | ngram-beam
  std::size_t oov_count = 0;
  std::size_t beam = 0;  // meaningful for ngram-beam rows
  std::size_t evaluated = 0;
  std::size_t correct = 0;

  double accuracy() const { return evaluated ? static_cast<double>(correct) / static_cast<double>(evaluated) : 0.0; }
};

/// Intent accuracy on corrupted held-out relevant questions under each
/// correction setting. Questions with too few eligible words for a given
/// OOV count are skipped for that count (all settings share the same subset).
inline std::vector<SpellAblationRow> run_spell_ablation(const LabeledDataset& ds, const SplitPlan& plan,
                                                        const SpellAblationConfig& config,
                                                        const MaskedTokenScorer* file_scorer = nullptr) {
  using escalada::detail::derive_seed;
  const auto& ex = config.experiment;
  const auto classes = ds.class_indices(ex.tier);
  const auto names = ds.label_space(ex.tier);
  const auto train_rel = plan.relevant_with(Role::Train);
  auto cfg = ex.classifier;
  cfg.seed = derive_seed(ex.seed, "classifier");
  const auto model = train_classifier(ds, classes, names, train_rel, {}, cfg);

  std::vector<std::string> train_texts;
  std::unordered_map<std::string, std::size_t> freq;
  for (std::size_t i : train_rel) {
    train_texts.push_back(ds.relevant[i].text);
    for (const auto& t : tokenize_sentence(ds.relevant[i].text)) ++freq[escalada::detail::to_lower(t)];
  }
  const NgramScorer ngram(train_texts, config.ngram);
  VocabularyConfig vocab;
  for (const auto& [w, f] : freq) vocab.training_vocab.insert(w);
  const VocabularyMatcher matcher(vocab);
  std::vector<std::pair<std::string, std::size_t>> word_freq(freq.begin(), freq.end());
  std::sort(word_freq.begin(), word_freq.end());
  const NearestWordCorrector no_lm(word_freq, config.completion.max_edit_distance);

  auto held_out = plan.relevant_with(Role::ThresholdLearn);
  const auto test_rel = plan.relevant_with(Role::Test);
  held_out.insert(held_out.end(), test_rel.begin(), test_rel.end());
  std::sort(held_out.begin(), held_out.end());

  auto classify = [&](const std::string& text) { return argmax(model.predict(text)); };
  // A dump answers one masked query per sentence, so joint search cannot be replayed from it.
  CompletionConfig file_completion = config.completion;
  file_completion.v2_beam_cutoff = 0;

  std::vector<SpellAblationRow> rows;
  auto add_setting = [&](std::string setting, std::size_t count, std::size_t beam, const std::vector<char>& ok,
                         const std::vector<char>& usable) {
    SpellAblationRow row{std::move(setting), count, beam, 0, 0};
    for (std::size_t q = 0; q < ok.size(); ++q) {
      if (!usable[q]) continue;
      ++row.evaluated;
      row.correct += ok[q] ? 1 : 0;
    }
    rows.push_back(std::move(row));
  };

  for (std::size_t count : config.oov_counts) {
    const std::size_t n = held_out.size();
    std::vector<std::string> corrupted(n);
    std::vector<char> usable(n, 0);
    for (std::size_t q = 0; q < n; ++q) {
      try {
        corrupted[q] =
            gen_misspellings(ds.relevant[held_out[q]].text, count, derive_seed(ex.seed, q * 8 + count)).text;
        usable[q] = 1;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotEnoughWords) throw;
      }
    }
    std::vector<char> clean(n, 0), raw(n, 0), nolm(n, 0), lm(n, 0), file(n, 0);
    parallel_for(n, ex.jobs, [&](std::size_t q) {
      if (!usable[q]) return;
      const std::size_t truth = classes[held_out[q]];
      clean[q] = classify(ds.relevant[held_out[q]].text) == truth;
      raw[q] = classify(corrupted[q]) == truth;
      const auto tokens = tokenize_sentence(corrupted[q]);
      const auto targets = detect_oov(tokens, matcher);
      nolm[q] = classify(escalada::detail::join(no_lm.complete(tokens, targets), " ")) == truth;
      lm[q] = classify(complete(tokens, matcher, ngram, config.completion).sentence()) == truth;
      if (file_scorer) file[q] = classify(complete(tokens, matcher, *file_scorer, file_completion).sentence()) == truth;
    });
    add_setting("clean", count, 0, clean, usable);
    add_setting("uncorrected", count, 0, raw, usable);
    add_setting("no-lm", count, 0, nolm, usable);
    add_setting("ngram", count, 0, lm, usable);
    if (file_scorer) add_setting("file", count, 0, file, usable);

    if (count == config.beam_sweep_oov_count) {
      for (std::size_t beam : config.beam_sizes) {
        CompletionConfig cc = config.completion;
        cc.m = cc.b = beam;
        std::vector<char> hit(n, 0);
        parallel_for(n, ex.jobs, [&](std::size_t q) {
          if (!usable[q]) return;
          const auto tokens = tokenize_sentence(corrupted[q]);
          hit[q] = classify(complete(tokens, matcher, ngram, cc).sentence()) == classes[held_out[q]];
        });
        add_setting("ngram-beam", count, beam, hit, usable);
      }
    }
  }
  return rows;
}

}  // namespace escalada::bench

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

// Trains an intent classifier on the built-in desk corpus, learns an entropy
// threshold for escalating to a human, then routes a few questions and
// repairs a misspelled one.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "escalada/escalada.hpp"

using namespace escalada;
using namespace escalada::bench;

int main() {
  const auto ds = make_desk_corpus();
  const std::uint64_t seed = 7;
  const auto plan = make_splits(ds, seed);
  const auto classes = ds.class_indices(3);
  const auto names = ds.label_space(3);

  BowClassifierConfig cfg;
  cfg.epochs = 15;
  cfg.hidden_units = 64;
  cfg.seed = seed;
  const auto model = train_classifier(ds, classes, names, plan.relevant_with(Role::Train), {}, cfg);
  std::cout << "intents: " << model.k() << ", training questions: " << plan.relevant_with(Role::Train).size() << "\n";

  // Threshold learning on held-out relevant and irrelevant questions.
  const Pool pool = make_pool(ds, classes, plan.relevant_with(Role::ThresholdLearn),
                              plan.irrelevant_with(Role::ThresholdLearn));
  const auto stats = score_pool(model, pool, 0, 0, 1);
  const double delta = 0.5;
  const auto loss = build_loss_labels(pool.labels, model.k(), delta);
  const auto sol = solve_entropy_threshold(stats, loss);
  const auto policy = ThresholdPolicy::entropy(sol.b, model.k(), delta);
  std::printf("entropy threshold b = %.4f (escalates %zu of %zu threshold questions)\n\n", sol.b,
              sol.escalated_count, stats.size());

  const std::vector<std::string> questions{
      "what is my checking balance",
      "i want to report my card as stolen",
      "how do i transfer money to my savings",
      "who won the football game last night",
      "recommend a good pizza place",
  };
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto s = stats_from_probs({"q" + std::to_string(i), {}, model.predict(questions[i])});
    const auto d = decide(policy, s);
    std::printf("%-42s H=%.3f  -> %s\n", questions[i].c_str(), s.entropy,
                d.escalated() ? "escalate to a human" : model.label_names()[*d.answer].c_str());
  }

  // Spell correction with an n-gram scorer trained on the same questions.
  std::vector<std::string> corpus;
  VocabularyConfig vocab;
  for (std::size_t i : plan.relevant_with(Role::Train)) {
    corpus.push_back(ds.relevant[i].text);
    for (const auto& t : tokenize_sentence(ds.relevant[i].text)) vocab.training_vocab.insert(escalada::detail::to_lower(t));
  }
  const NgramScorer scorer(corpus);
  const std::string typo = "transfre funds to my savngs acount";
  const auto tokens = tokenize_sentence(typo);
  const auto result = complete(tokens, VocabularyMatcher(vocab), scorer, CompletionConfig{});
  std::cout << "\n" << typo << "\n  -> " << result.sentence() << "  (" << to_string(result.strategy) << ")\n";
  const auto repaired = stats_from_probs({"typo", {}, model.predict(result.sentence())});
  const auto d = decide(policy, repaired);
  std::cout << "  routed to: " << (d.escalated() ? "a human" : model.label_names()[*d.answer]) << "\n";
  return 0;
}

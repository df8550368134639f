// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "escalada/escalada.hpp"
#include "test_support.hpp"

namespace {

using namespace escalada;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome entropy_identities() {
  double worst = 0.0;
  for (std::size_t k : {2u, 5u, 381u}) {
    std::vector<double> p(k, 1.0 / static_cast<double>(k));
    worst = std::max(worst, std::fabs(shannon_entropy(p) - std::log(static_cast<double>(k))));
  }
  bool one_hot_zero = true;
  for (std::size_t k : {2u, 5u, 381u}) {
    for (std::size_t hot = 0; hot < k; hot += std::max<std::size_t>(1, k / 7)) {
      std::vector<double> p(k, 0.0);
      p[hot] = 1.0;
      one_hot_zero = one_hot_zero && shannon_entropy(p) == 0.0;
    }
  }
  return {worst <= 1e-9 && one_hot_zero, "max |H(uniform)-ln K| = " + fmt("%.3g", worst) +
                                             (one_hot_zero ? ", one-hot exactly 0" : ", one-hot NOT 0")};
}

Outcome entropy_solver_exactness() {
  std::vector<UncertaintyStats> worked{{"r1", {0.9, 0.1}, {}, 0.1}, {"r2", {0.2, 0.8}, {}, 0.2},
                                       {"r3", {0.6, 0.4}, {}, 1.0}, {"i1", {0.6, 0.4}, {}, 0.9},
                                       {"i2", {0.5, 0.5}, {}, 1.1}};
  const std::vector<ClassLabel> labels{0, 1, 1, kIrrelevant, kIrrelevant};
  const auto ws = solve_entropy_threshold(worked, build_loss_labels(labels, 2, 0.5));
  const bool worked_ok = ws.b == 0.9 && ws.objective == 2.25;

  detail::Rng rng(20260101);
  const double deltas[] = {0.3, 0.5, 0.7};
  std::size_t mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    auto inst = testing::random_instance(rng, 1 + rng.below(200), 2 + rng.below(9), deltas[t % 3], false);
    const auto sol = solve_entropy_threshold(inst.stats, inst.loss);
    if (sol.objective != testing::brute_force_entropy_min(inst)) ++mismatches;
  }
  return {worked_ok && mismatches == 0, "200 instances, " + std::to_string(mismatches) +
                                            " mismatches; worked instance b=" + fmt("%g", ws.b) +
                                            " objective=" + fmt("%g", ws.objective)};
}

Outcome dropout_solver_dominance() {
  detail::Rng rng(777);
  std::size_t violations = 0;
  std::size_t on_grid = 0;
  std::size_t on_grid_unequal = 0;
  const std::size_t steps = 100;
  auto is_grid_value = [&](double v) {
    for (std::size_t i = 0; i < steps; ++i) {
      const double g = i == steps - 1 ? 1.0 : static_cast<double>(i) * (1.0 / static_cast<double>(steps - 1));
      if (g == v) return true;
    }
    return false;
  };
  for (int t = 0; t < 100; ++t) {
    auto inst = testing::random_instance(rng, 1 + rng.below(120), 2 + rng.below(6), 0.5, true);
    const auto sol = solve_dropout_thresholds(inst.stats, inst.loss);
    const auto grid = grid_search_oracle(inst.stats, inst.loss, steps);
    if (sol.objective > grid.best.objective) ++violations;
    if (is_grid_value(sol.c) && is_grid_value(sol.d)) {
      ++on_grid;
      if (sol.objective != grid.best.objective) ++on_grid_unequal;
    }
  }
  return {violations == 0 && on_grid_unequal == 0,
          "100 instances, " + std::to_string(violations) + " sweep > grid; " + std::to_string(on_grid) +
              " optima on grid, " + std::to_string(on_grid_unequal) + " of them unequal"};
}

Outcome loss_decomposition() {
  detail::Rng rng(99);
  double worst = 0.0;
  const double d5 = 0.5;
  const bool coefficients = d5 * d5 == 0.25 && 2 + d5 * d5 == 2.25 && 1 + (1 - d5) * (1 - d5) == 1.25 &&
                            1 + d5 * d5 == 1.25 && (1 - d5) * (1 - d5) == 0.25;
  for (int t = 0; t < 300; ++t) {
    const double delta = t % 3 == 0 ? 0.5 : rng.uniform();
    auto inst = testing::random_instance(rng, 1 + rng.below(150), 2 + rng.below(8), delta, true);
    ThresholdPolicy policy = t % 2 ? ThresholdPolicy::entropy(rng.uniform() * 2.0, inst.k, delta)
                                   : ThresholdPolicy::dropout(rng.uniform(), rng.uniform() * 0.2, inst.k, delta);
    const double direct = evaluate_loss(policy, inst.stats, inst.loss);
    const auto counts = tally(decide_all(policy, inst.stats), inst.labels);
    worst = std::max(worst, std::fabs(direct - testing::closed_form_loss(counts, delta)));
  }
  return {coefficients && worst <= 1e-9, "300 instances, max |diff| = " + fmt("%.3g", worst)};
}

Outcome mcd_sanity() {
  using namespace escalada::bench;
  const auto ds = make_desk_corpus();
  const auto plan = make_splits(ds, 1);

  // Dropout 0: every MC pass is the deterministic pass.
  BowClassifierConfig zero;
  zero.dropout_ratio = 0.0;
  zero.epochs = 3;
  const auto model0 = train_classifier(ds, ds.class_indices(), ds.label_space(), plan.relevant_with(Role::Train), {}, zero);
  bool zero_std = true;
  for (std::size_t i = 0; i < ds.irrelevant.size(); i += 10) {
    const auto stats = aggregate_mc(model0.mc_predict(ds.irrelevant[i].text, 20, i));
    for (double s : stats.std_devs) zero_std = zero_std && s == 0.0;
  }

  ExperimentConfig ex;
  ex.classifier.epochs = 30;
  ex.classifier.dropout_ratio = 0.1;
  ex.mc_samples = 100;
  ex.seed = 1;
  ex.jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto dir = measure_uncertainty_direction(ds, plan, ex);
  const bool scale = ds.label_space().size() >= 20 && ds.irrelevant.size() >= 200;
  return {zero_std && scale && dir.out_of_scope_std > dir.in_scope_std,
          std::string(zero_std ? "dropout 0 stds all zero" : "dropout 0 stds NOT zero") + "; K=" +
              std::to_string(ds.label_space().size()) + ", mean std out-of-scope " +
              fmt("%.5f", dir.out_of_scope_std) + " (n=" + std::to_string(dir.out_of_scope) + ") vs in-scope " +
              fmt("%.5f", dir.in_scope_std) + " (n=" + std::to_string(dir.in_scope) + ")"};
}

Outcome escalation_monotonicity() {
  detail::Rng rng(4242);
  std::size_t violations = 0;
  std::size_t pairs = 0;
  for (int t = 0; t < 200; ++t) {
    auto inst = testing::random_instance(rng, 1 + rng.below(100), 2 + rng.below(8), 0.5, false);
    std::vector<double> cutoffs{0.0};
    for (const auto& s : inst.stats) cutoffs.push_back(s.entropy);
    for (int i = 0; i < 5; ++i) cutoffs.push_back(rng.uniform() * 3.0);
    std::sort(cutoffs.begin(), cutoffs.end());
    cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
    for (std::size_t a = 0; a + 1 < cutoffs.size(); ++a) {
      const auto lo = decide_all(ThresholdPolicy::entropy(cutoffs[a], inst.k), inst.stats);
      const auto hi = decide_all(ThresholdPolicy::entropy(cutoffs[a + 1], inst.k), inst.stats);
      ++pairs;
      for (std::size_t i = 0; i < lo.size(); ++i) {
        if (hi[i].escalated() && !lo[i].escalated()) {
          ++violations;
          break;
        }
      }
    }
  }
  return {violations == 0, std::to_string(pairs) + " adjacent cutoff pairs, " + std::to_string(violations) +
                               " violations"};
}

Outcome edit_distance() {
  detail::Rng rng(12);
  std::size_t mismatches = 0;
  for (int t = 0; t < 10000; ++t) {
    auto word = [&] {
      std::string w(rng.below(13), ' ');
      for (auto& c : w) c = static_cast<char>('a' + rng.below(4));
      return w;
    };
    const auto a = word();
    const auto b = word();
    if (damerau_levenshtein(a, b) != testing::reference_osa(a, b)) ++mismatches;
  }
  const bool classic = damerau_levenshtein("kitten", "sitting") == 3 && damerau_levenshtein("teh", "the") == 1 &&
                       damerau_levenshtein("acount", "account") == 1;
  return {mismatches == 0 && classic,
          "10000 pairs, " + std::to_string(mismatches) + " mismatches; classic pairs " + (classic ? "ok" : "WRONG")};
}

Outcome beam_exactness() {
  detail::Rng rng(31337);
  std::size_t beam_bad = 0;
  std::size_t greedy_bad = 0;
  const int trials = 300;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::string> words;
    const std::size_t nw = 2 + rng.below(9);
    for (std::size_t i = 0; i < nw; ++i) {
      std::string w = "abcd";
      w[rng.below(4)] = static_cast<char>('e' + i);
      words.push_back(w);
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    testing::ContextHashScorer scorer(words, rng.next());
    std::vector<std::string> tokens{"start", "abcd", "mid", "abdc", "end", "bacd"};
    std::vector<std::size_t> targets{1, 3, 5};
    targets.resize(1 + rng.below(3));
    CompletionConfig cfg;
    cfg.m = 10;
    cfg.b = 1000;
    const auto beam = complete_joint_beam(tokens, targets, scorer, cfg);
    const auto brute = testing::brute_force_joint(tokens, targets, scorer, cfg.m, cfg.max_edit_distance);
    auto expected = tokens;
    for (std::size_t i = 0; i < targets.size(); ++i) expected[targets[i]] = brute.chosen[i];
    if (beam.completed_tokens != expected) ++beam_bad;
    cfg.b = 1;
    const auto greedy = complete_joint_beam(tokens, targets, scorer, cfg);
    if (greedy.completed_tokens != testing::greedy_joint(tokens, targets, scorer, cfg.m, cfg.max_edit_distance)) {
      ++greedy_bad;
    }
  }
  return {beam_bad == 0 && greedy_bad == 0, std::to_string(trials) + " instances, " + std::to_string(beam_bad) +
                                                " beam != brute force, " + std::to_string(greedy_bad) +
                                                " B=1 != greedy"};
}

Outcome spell_direction() {
  using namespace escalada::bench;
  const auto ds = make_desk_corpus();
  std::vector<int> wins(4, 0);  // index by OOV count
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SpellAblationConfig cfg;
    cfg.experiment.seed = seed;
    cfg.experiment.jobs = std::max(1u, std::thread::hardware_concurrency());
    cfg.beam_sizes.clear();
    const auto rows = run_spell_ablation(ds, make_splits(ds, seed), cfg);
    for (std::size_t count = 1; count <= 3; ++count) {
      double clean = 0, corrected = 0, raw = 0;
      for (const auto& r : rows) {
        if (r.oov_count != count) continue;
        if (r.setting == "clean") clean = r.accuracy();
        if (r.setting == "ngram") corrected = r.accuracy();
        if (r.setting == "uncorrected") raw = r.accuracy();
      }
      if (clean > corrected && corrected > raw) ++wins[count];
      detail << " s" << seed << "/" << count << ":" << fmt("%.3f", clean) << ">" << fmt("%.3f", corrected) << ">"
             << fmt("%.3f", raw);
    }
  }
  const bool pass = wins[1] >= 3 && wins[2] >= 3 && wins[3] >= 3;
  return {pass, "seeds ordered per OOV count 1/2/3: " + std::to_string(wins[1]) + "/" + std::to_string(wins[2]) + "/" +
                    std::to_string(wins[3]) + " of 5;" + detail.str()};
}

Outcome protocol_integrity() {
  using namespace escalada::bench;
  LabeledDataset ds;
  for (std::size_t c = 0; c < 5; ++c) {
    for (std::size_t i = 0; i < 20; ++i) {
      const std::string label = "c" + std::to_string(c);
      ds.relevant.push_back({label + "-" + std::to_string(i), label + " text " + std::to_string(i), {"", "", label}});
    }
  }
  for (std::size_t i = 0; i < 50; ++i) ds.irrelevant.push_back({"o" + std::to_string(i), "other " + std::to_string(i)});
  const auto plan = make_splits(ds, 5);
  const bool ratios = plan.relevant_with(Role::Train).size() == 80 &&
                      plan.relevant_with(Role::ThresholdLearn).size() == 16 &&
                      plan.relevant_with(Role::Test).size() == 4 && plan.irrelevant_with(Role::Test).size() == 10 &&
                      plan.irrelevant_with(Role::ThresholdLearn).size() == 40;
  const bool deterministic = plan == make_splits(ds, 5);

  const auto desk = make_desk_corpus();
  bool leak_free = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    try {
      check_no_leakage(desk, make_splits(desk, seed));
    } catch (const Error&) {
      leak_free = false;
    }
  }
  const auto desk_plan = make_splits(desk, 0);
  const double n = static_cast<double>(desk.relevant.size());
  const auto near = [&](std::size_t got, double share) { return std::fabs(static_cast<double>(got) - share * n) <= 28.0; };
  const bool desk_ratios = near(desk_plan.relevant_with(Role::Train).size(), 0.80) &&
                           near(desk_plan.relevant_with(Role::ThresholdLearn).size(), 0.16) &&
                           near(desk_plan.relevant_with(Role::Test).size(), 0.04);

  ExperimentConfig ex;
  ex.classifier.epochs = 5;
  ex.classifier.hidden_units = 64;
  ex.mc_samples = 20;
  ex.irrelevant_counts = {20, 240};
  ex.jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto report = run_method_comparison(desk, desk_plan, ex);
  bool f1_exact = !report.rows.empty();
  for (const auto& r : report.rows) {
    f1_exact = f1_exact && r.f1() == ConfusionCounts::harmonic_mean(r.precision(), r.recall());
  }
  return {ratios && deterministic && leak_free && desk_ratios && f1_exact,
          std::string("80/16/4 + 40/10 ") + (ratios ? "ok" : "WRONG") + ", deterministic " +
              (deterministic ? "yes" : "NO") + ", leak-free " + (leak_free ? "yes" : "NO") + ", desk ratios " +
              (desk_ratios ? "ok" : "OFF") + ", F1 recompute " + (f1_exact ? "exact" : "MISMATCH")};
}

Outcome oov_monitor() {
  using namespace std::chrono;
  const OovRateMonitor::Timestamp t0{sys_days{year{2026} / 1 / 1}};
  OovRateMonitor on;
  on.record(t0, 2, 100);
  OovRateMonitor off;
  off.record(t0, 1, 200);
  OovRateMonitor window;
  window.record(t0, 5, 100);
  window.record(t0 + hours(23), 0, 100);
  const bool before = window.status_at(t0 + hours(23)).alarm;
  window.record(t0 + hours(25), 0, 100);
  const auto after = window.status_at(t0 + hours(25));
  const bool pass = on.status_at(t0).alarm && !off.status_at(t0).alarm && before && !after.alarm && after.events == 2;
  return {pass, std::string("2/100 alarm ") + (on.status_at(t0).alarm ? "on" : "off") + ", 1/200 alarm " +
                    (off.status_at(t0).alarm ? "on" : "off") + ", after window events=" + std::to_string(after.events) +
                    " alarm " + (after.alarm ? "on" : "off")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"entropy identities", 1.0, entropy_identities},
      {"entropy-threshold solver exactness", 10.0, entropy_solver_exactness},
      {"dropout-threshold solver dominance", 60.0, dropout_solver_dominance},
      {"loss decomposition", 60.0, loss_decomposition},
      {"MC dropout sanity", 300.0, mcd_sanity},
      {"escalation-count monotonicity", 60.0, escalation_monotonicity},
      {"edit distance", 60.0, edit_distance},
      {"beam exactness", 60.0, beam_exactness},
      {"spell-correction direction", 600.0, spell_direction},
      {"protocol integrity", 120.0, protocol_integrity},
      {"OOV monitor", 1.0, oov_monitor},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs < c.time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s  %-36s %8.2fs (limit %.0fs)  %s%s\n", pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                c.time_limit_s, o.detail.c_str(), in_time ? "" : " [over time limit]");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file splits.hpp
 * @brief Nested five-fold protocol.
 *
 * Relevant questions: fold 0 is held out, the other folds train the
 * classifier. The held-out part is split again into five sub-folds; sub-fold 0
 * is the relevant test set and the rest learn thresholds. Irrelevant
 * questions: fold 0 is the test pool, the other four learn thresholds.
 */

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "escalada/bench/dataset.hpp"
#include "escalada/detail/rng.hpp"
#include "escalada/error.hpp"

namespace escalada::bench {

enum class Role { Train, ThresholdLearn, Test };

inline std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::Train: return "train";
    case Role::ThresholdLearn: return "threshold";
    case Role::Test: return "test";
  }
  return "?";
}

struct SplitPlan {
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::vector<std::size_t> relevant_fold;
  std::vector<std::size_t> relevant_subfold;  // meaningful for held-out rows only
  std::vector<std::size_t> irrelevant_fold;
  std::vector<Role> relevant_role;
  std::vector<Role> irrelevant_role;
  bool stratified = false;
  std::vector<std::string> warnings;

  std::vector<std::size_t> relevant_with(Role r) const { return select(relevant_role, r); }
  std::vector<std::size_t> irrelevant_with(Role r) const { return select(irrelevant_role, r); }

  friend bool operator==(const SplitPlan& a, const SplitPlan& b) {
    return a.seed == b.seed && a.folds == b.folds && a.relevant_fold == b.relevant_fold &&
           a.relevant_subfold == b.relevant_subfold && a.irrelevant_fold == b.irrelevant_fold &&
           a.relevant_role == b.relevant_role && a.irrelevant_role == b.irrelevant_role;
  }

 private:
  static std::vector<std::size_t> select(const std::vector<Role>& roles, Role r) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < roles.size(); ++i) {
      if (roles[i] == r) out.push_back(i);
    }
    return out;
  }
};

namespace detail_split {

// Fold ids for `items` (indices into the pool): shuffle within each class,
// concatenate the classes in label order, assign fold = position mod folds.
inline void assign_folds(std::span<const std::size_t> items, std::span<const std::size_t> classes, bool stratify,
                         std::size_t folds, escalada::detail::Rng& rng, std::vector<std::size_t>& fold_of) {
  std::vector<std::size_t> order;
  if (stratify) {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i : items) groups[classes[i]].push_back(i);
    for (auto& [c, g] : groups) {
      rng.shuffle(std::span(g));
      order.insert(order.end(), g.begin(), g.end());
    }
  } else {
    order.assign(items.begin(), items.end());
    rng.shuffle(std::span(order));
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold_of[order[pos]] = pos % folds;
}

}  // namespace detail_split

inline SplitPlan make_splits(const LabeledDataset& ds, std::uint64_t seed, int tier = 3, std::size_t folds = 5) {
  if (folds < 2) throw Error(ErrorKind::BadConfig, "need at least two folds");
  const std::size_t n_rel = ds.relevant.size();
  const std::size_t n_irr = ds.irrelevant.size();
  if (n_rel < folds * folds) {
    throw Error(ErrorKind::TooFewSamples, "need at least " + std::to_string(folds * folds) + " relevant questions, have " +
                                              std::to_string(n_rel));
  }
  if (n_irr < folds) {
    throw Error(ErrorKind::TooFewSamples, "need at least " + std::to_string(folds) + " irrelevant questions, have " +
                                              std::to_string(n_irr));
  }

  SplitPlan plan;
  plan.seed = seed;
  plan.folds = folds;
  const auto classes = ds.class_indices(tier);
  const auto space = ds.label_space(tier);
  std::vector<std::size_t> per_class(space.size(), 0);
  for (std::size_t c : classes) ++per_class[c];
  plan.stratified = std::all_of(per_class.begin(), per_class.end(), [&](std::size_t n) { return n >= folds; });
  if (!plan.stratified) {
    plan.warnings.push_back("some classes have fewer than " + std::to_string(folds) +
                            " samples; using an unstratified shuffle");
  }

  escalada::detail::Rng rel_rng(escalada::detail::derive_seed(seed, "split/relevant"));
  escalada::detail::Rng sub_rng(escalada::detail::derive_seed(seed, "split/held-out"));
  escalada::detail::Rng irr_rng(escalada::detail::derive_seed(seed, "split/irrelevant"));

  std::vector<std::size_t> all(n_rel);
  std::iota(all.begin(), all.end(), std::size_t{0});
  plan.relevant_fold.assign(n_rel, 0);
  detail_split::assign_folds(all, classes, plan.stratified, folds, rel_rng, plan.relevant_fold);

  std::vector<std::size_t> held_out;
  for (std::size_t i = 0; i < n_rel; ++i) {
    if (plan.relevant_fold[i] == 0) held_out.push_back(i);
  }
  plan.relevant_subfold.assign(n_rel, 0);
  detail_split::assign_folds(held_out, classes, plan.stratified, folds, sub_rng, plan.relevant_subfold);

  plan.relevant_role.assign(n_rel, Role::Train);
  for (std::size_t i : held_out) {
    plan.relevant_role[i] = plan.relevant_subfold[i] == 0 ? Role::Test : Role::ThresholdLearn;
  }

  std::vector<std::size_t> irr(n_irr);
  std::iota(irr.begin(), irr.end(), std::size_t{0});
  plan.irrelevant_fold.assign(n_irr, 0);
  detail_split::assign_folds(irr, {}, false, folds, irr_rng, plan.irrelevant_fold);
  plan.irrelevant_role.assign(n_irr, Role::ThresholdLearn);
  for (std::size_t i = 0; i < n_irr; ++i) {
    if (plan.irrelevant_fold[i] == 0) plan.irrelevant_role[i] = Role::Test;
  }

  std::vector<std::size_t> trained(space.size(), 0);
  for (std::size_t i = 0; i < n_rel; ++i) {
    if (plan.relevant_role[i] == Role::Train) ++trained[classes[i]];
  }
  for (std::size_t c = 0; c < space.size(); ++c) {
    if (trained[c] == 0) throw Error(ErrorKind::TooFewSamples, "class '" + space[c] + "' has no training questions");
  }
  return plan;
}

/// Throws InvariantViolation if any test id or text also appears in a
/// training or threshold-learning pool.
inline void check_no_leakage(const LabeledDataset& ds, const SplitPlan& plan) {
  std::unordered_set<std::string> seen_ids;
  for (std::size_t i = 0; i < ds.relevant.size(); ++i) {
    if (plan.relevant_role[i] != Role::Test) seen_ids.insert(ds.relevant[i].id);
  }
  for (std::size_t i = 0; i < ds.irrelevant.size(); ++i) {
    if (plan.irrelevant_role[i] != Role::Test) seen_ids.insert(ds.irrelevant[i].id);
  }
  for (std::size_t i = 0; i < ds.relevant.size(); ++i) {
    if (plan.relevant_role[i] == Role::Test && seen_ids.contains(ds.relevant[i].id)) {
      throw Error(ErrorKind::InvariantViolation, "test id '" + ds.relevant[i].id + "' leaks into training data");
    }
  }
  for (std::size_t i = 0; i < ds.irrelevant.size(); ++i) {
    if (plan.irrelevant_role[i] == Role::Test && seen_ids.contains(ds.irrelevant[i].id)) {
      throw Error(ErrorKind::InvariantViolation, "test id '" + ds.irrelevant[i].id + "' leaks into training data");
    }
  }
}

/// First `count` of a seeded permutation of `pool` (all of it if count is larger).
inline std::vector<std::size_t> subsample(std::span<const std::size_t> pool, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> out(pool.begin(), pool.end());
  escalada::detail::Rng rng(seed);
  rng.shuffle(std::span(out));
  if (count < out.size()) out.resize(count);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace escalada::bench

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file prediction.hpp
 * @brief Probabilistic prediction records and the two uncertainty measures
 * derived from them: predictive entropy of a softmax vector, and per-class
 * mean / standard deviation over Monte Carlo dropout passes.
 *
 * Entropy uses the natural logarithm with 0 ln 0 := 0. Standard deviations
 * use the population divisor S, so a single pass has zero spread.
 */

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "escalada/error.hpp"

namespace escalada {

/// Ground-truth class of a sample; `kIrrelevant` marks out-of-scope input.
using ClassLabel = std::optional<std::size_t>;
inline constexpr std::nullopt_t kIrrelevant = std::nullopt;

inline constexpr double kDistributionTolerance = 1e-6;

struct PredictionRow {
  std::string sample_id;
  ClassLabel true_label;
  std::vector<double> probs;
};

struct PredictionSet {
  std::size_t k = 0;
  std::vector<std::string> label_names;
  std::vector<PredictionRow> rows;
};

/// S stochastic forward passes for one sample; each row is a distribution.
struct McSampleSet {
  std::string sample_id;
  std::vector<std::vector<double>> samples;

  std::size_t s() const noexcept { return samples.size(); }
};

struct UncertaintyStats {
  std::string sample_id;
  std::vector<double> mean_probs;
  /// Empty when the statistics come from a single deterministic pass.
  std::vector<double> std_devs;
  double entropy = 0.0;

  bool has_std() const noexcept { return !std_devs.empty(); }
};

/// Index of the largest entry; the lowest index wins ties.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline void check_distribution(std::span<const double> probs, const std::string& context = {}) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || p > 1.0 + kDistributionTolerance) {
      throw Error(ErrorKind::NonDistribution,
                  context + " entry outside [0,1]: " + std::to_string(p));
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kDistributionTolerance) {
    throw Error(ErrorKind::NonDistribution, context + " sums to " + std::to_string(sum));
  }
}

inline double shannon_entropy(std::span<const double> probs) {
  check_distribution(probs);
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h > 0.0 ? h : 0.0;
}

inline UncertaintyStats aggregate_mc(const McSampleSet& set) {
  if (set.samples.empty()) {
    throw Error(ErrorKind::EmptySamples, "sample set '" + set.sample_id + "' has no passes");
  }
  const std::size_t k = set.samples.front().size();
  for (const auto& row : set.samples) {
    if (row.size() != k) {
      throw Error(ErrorKind::InvariantViolation,
                  "ragged Monte Carlo samples for '" + set.sample_id + "'");
    }
    check_distribution(row, "MC pass of '" + set.sample_id + "'");
  }

  // Accumulate offsets from the first pass so S identical passes reproduce it exactly.
  const auto& pivot = set.samples.front();
  const auto s = static_cast<double>(set.s());
  UncertaintyStats out;
  out.sample_id = set.sample_id;
  out.mean_probs.assign(k, 0.0);
  out.std_devs.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    double shift = 0.0;
    for (const auto& row : set.samples) shift += row[c] - pivot[c];
    const double mean = pivot[c] + shift / s;
    double ss = 0.0;
    for (const auto& row : set.samples) {
      const double d = row[c] - mean;
      ss += d * d;
    }
    out.mean_probs[c] = mean;
    out.std_devs[c] = std::sqrt(ss / s);
  }
  out.entropy = shannon_entropy(out.mean_probs);
  return out;
}

/// Single-pass statistics: mean is the softmax output itself, no spread.
inline UncertaintyStats stats_from_probs(const PredictionRow& row) {
  UncertaintyStats out;
  out.sample_id = row.sample_id;
  out.mean_probs = row.probs;
  out.entropy = shannon_entropy(row.probs);
  return out;
}

/// Mean over questions of the standard deviation at each question's argmax class.
inline double mean_std_over(std::span<const UncertaintyStats> questions) {
  if (questions.empty()) throw Error(ErrorKind::EmptyInput, "no questions to average");
  double total = 0.0;
  for (const auto& q : questions) {
    if (!q.has_std()) {
      throw Error(ErrorKind::MissingStd, "question '" + q.sample_id + "' has no std_devs");
    }
    total += q.std_devs[argmax(q.mean_probs)];
  }
  return total / static_cast<double>(questions.size());
}

/// Checks PredictionSet invariants: K >= 2, shared K, unique ids, valid rows.
inline void validate(const PredictionSet& set) {
  if (set.k < 2) throw Error(ErrorKind::InvariantViolation, "K must be at least 2");
  if (!set.label_names.empty() && set.label_names.size() != set.k) {
    throw Error(ErrorKind::InvariantViolation, "label_names size differs from K");
  }
  std::unordered_set<std::string> seen;
  for (const auto& row : set.rows) {
    if (row.probs.size() != set.k) {
      throw Error(ErrorKind::InvariantViolation, "row '" + row.sample_id + "' has wrong K");
    }
    if (row.true_label && *row.true_label >= set.k) {
      throw Error(ErrorKind::InvariantViolation, "row '" + row.sample_id + "' label out of range");
    }
    if (!seen.insert(row.sample_id).second) {
      throw Error(ErrorKind::InvariantViolation, "duplicate sample_id '" + row.sample_id + "'");
    }
    try {
      check_distribution(row.probs);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvariantViolation, "row '" + row.sample_id + "': " + e.what());
    }
  }
}

}  // namespace escalada

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file escalation.hpp
 * @brief Learning when to hand a question to a human.
 *
 * Each sample i gets a target row l_i of width K+1: one-hot on the true class
 * for relevant questions (all zero for irrelevant ones) and the escalation
 * cost delta in the last column. A policy assigns each sample either its
 * classifier argmax class or the escalation column, and the training loss is
 * sum_i,k (x_ik - l_ik)^2.
 *
 * Both threshold programs are solved exactly by enumeration. The loss is
 * piecewise constant in the thresholds and only changes where a threshold
 * crosses an observed statistic, so sweeping the observed values visits every
 * achievable decision set.
 */

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "escalada/error.hpp"
#include "escalada/metrics.hpp"
#include "escalada/prediction.hpp"

namespace escalada {

inline constexpr double kDefaultDelta = 0.5;

struct EscalationLossMatrix {
  std::size_t n = 0;
  std::size_t k = 0;
  double delta = kDefaultDelta;
  /// Optional alignment keys; when present evaluate_loss checks them.
  std::vector<std::string> sample_ids;
  /// Row-major n x (k+1).
  std::vector<double> targets;

  std::size_t width() const noexcept { return k + 1; }
  std::span<const double> row(std::size_t i) const {
    return {targets.data() + i * width(), width()};
  }
  bool relevant(std::size_t i) const {
    const auto r = row(i);
    return std::any_of(r.begin(), r.end() - 1, [](double v) { return v == 1.0; });
  }
};

inline EscalationLossMatrix build_loss_labels(std::span<const ClassLabel> labels, std::size_t k,
                                              double delta,
                                              std::span<const std::string> sample_ids = {}) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::BadDelta, "delta must lie in (0,1), got " + std::to_string(delta));
  }
  if (!sample_ids.empty() && sample_ids.size() != labels.size()) {
    throw Error(ErrorKind::MisalignedData, "sample_ids and labels differ in length");
  }
  EscalationLossMatrix m;
  m.n = labels.size();
  m.k = k;
  m.delta = delta;
  m.sample_ids.assign(sample_ids.begin(), sample_ids.end());
  m.targets.assign(m.n * m.width(), 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    if (labels[i]) {
      if (*labels[i] >= k) {
        throw Error(ErrorKind::BadLabel, "class index " + std::to_string(*labels[i]) +
                                             " out of range for K=" + std::to_string(k));
      }
      m.targets[i * m.width() + *labels[i]] = 1.0;
    }
    m.targets[i * m.width() + k] = delta;
  }
  return m;
}

enum class PolicyMode { Entropy, Dropout, DummyClass };

struct ThresholdPolicy {
  PolicyMode mode = PolicyMode::Entropy;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
  std::size_t k = 0;
  double delta = kDefaultDelta;

  static ThresholdPolicy entropy(double b, std::size_t k, double delta = kDefaultDelta) {
    return {PolicyMode::Entropy, b, 0.0, 1.0, k, delta};
  }
  static ThresholdPolicy dropout(double c, double d, std::size_t k, double delta = kDefaultDelta) {
    return {PolicyMode::Dropout, 0.0, c, d, k, delta};
  }
  static ThresholdPolicy dummy(std::size_t k, double delta = kDefaultDelta) {
    return {PolicyMode::DummyClass, 0.0, 0.0, 1.0, k, delta};
  }
};

enum class DecisionReason { None, EntropyAboveCutoff, ProbBelowCutoff, StdAboveCutoff, DummyArgmax };

constexpr std::string_view to_string(DecisionReason r) noexcept {
  switch (r) {
    case DecisionReason::None: return "none";
    case DecisionReason::EntropyAboveCutoff: return "entropy>=b";
    case DecisionReason::ProbBelowCutoff: return "prob<=c";
    case DecisionReason::StdAboveCutoff: return "std>=d";
    case DecisionReason::DummyArgmax: return "dummy-argmax";
  }
  return "none";
}

struct Decision {
  std::string sample_id;
  /// Answered class, or empty for escalation.
  std::optional<std::size_t> answer;
  DecisionReason reason = DecisionReason::None;

  bool escalated() const noexcept { return !answer.has_value(); }
};

inline Decision decide(const ThresholdPolicy& policy, const UncertaintyStats& stats) {
  Decision out{stats.sample_id, std::nullopt, DecisionReason::None};
  switch (policy.mode) {
    case PolicyMode::Entropy:
      if (stats.entropy >= policy.b) {
        out.reason = DecisionReason::EntropyAboveCutoff;
      } else {
        out.answer = argmax(stats.mean_probs);
      }
      break;
    case PolicyMode::Dropout: {
      if (!stats.has_std()) {
        throw Error(ErrorKind::MissingStd, "dropout policy needs std_devs for '" + stats.sample_id + "'");
      }
      const std::size_t top = argmax(stats.mean_probs);
      if (stats.mean_probs[top] <= policy.c) {
        out.reason = DecisionReason::ProbBelowCutoff;
      } else if (stats.std_devs[top] >= policy.d) {
        out.reason = DecisionReason::StdAboveCutoff;
      } else {
        out.answer = top;
      }
      break;
    }
    case PolicyMode::DummyClass: {
      if (stats.mean_probs.size() != policy.k + 1) {
        throw Error(ErrorKind::MisalignedData,
                    "dummy-class policy expects K+1 probabilities for '" + stats.sample_id + "'");
      }
      const std::size_t top = argmax(stats.mean_probs);
      if (top == policy.k) {
        out.reason = DecisionReason::DummyArgmax;
      } else {
        out.answer = top;
      }
      break;
    }
  }
  return out;
}

namespace detail {

/// Loss of assigning sample i to `column` (K means escalate).
inline double row_loss(const EscalationLossMatrix& loss, std::size_t i, std::size_t column) {
  const auto r = loss.row(i);
  double total = 0.0;
  for (std::size_t c = 0; c < r.size(); ++c) {
    const double x = c == column ? 1.0 : 0.0;
    total += (x - r[c]) * (x - r[c]);
  }
  return total;
}

/// Per-sample losses of the two possible outcomes, precomputed once so every
/// evaluation of a decision set sums identical terms in identical order.
struct OutcomeLosses {
  std::vector<std::size_t> argmax_class;
  std::vector<double> answered;
  std::vector<double> escalated;

  double total(const std::vector<char>& escalate) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < answered.size(); ++i) sum += escalate[i] ? escalated[i] : answered[i];
    return sum;
  }
};

inline void check_aligned(std::span<const UncertaintyStats> stats, const EscalationLossMatrix& loss) {
  if (stats.size() != loss.n) {
    throw Error(ErrorKind::MisalignedData, "stats has " + std::to_string(stats.size()) +
                                               " rows, loss matrix " + std::to_string(loss.n));
  }
  if (!loss.sample_ids.empty()) {
    for (std::size_t i = 0; i < stats.size(); ++i) {
      if (stats[i].sample_id != loss.sample_ids[i]) {
        throw Error(ErrorKind::MisalignedData, "row " + std::to_string(i) + ": '" +
                                                   stats[i].sample_id + "' vs '" +
                                                   loss.sample_ids[i] + "'");
      }
    }
  }
}

inline OutcomeLosses outcome_losses(std::span<const UncertaintyStats> stats,
                                    const EscalationLossMatrix& loss) {
  check_aligned(stats, loss);
  OutcomeLosses out;
  out.argmax_class.resize(loss.n);
  out.answered.resize(loss.n);
  out.escalated.resize(loss.n);
  for (std::size_t i = 0; i < loss.n; ++i) {
    if (stats[i].mean_probs.size() < loss.k) {
      throw Error(ErrorKind::MisalignedData, "'" + stats[i].sample_id + "' has fewer than K probabilities");
    }
    out.argmax_class[i] = argmax(std::span(stats[i].mean_probs).first(loss.k));
    out.answered[i] = row_loss(loss, i, out.argmax_class[i]);
    out.escalated[i] = row_loss(loss, i, loss.k);
  }
  return out;
}

inline double near_tolerance(double value) { return 1e-9 * std::max(1.0, std::fabs(value)); }

}  // namespace detail

inline std::vector<Decision> decide_all(const ThresholdPolicy& policy,
                                        std::span<const UncertaintyStats> stats) {
  std::vector<Decision> out;
  out.reserve(stats.size());
  for (const auto& s : stats) out.push_back(decide(policy, s));
  return out;
}

inline double evaluate_loss(const ThresholdPolicy& policy, std::span<const UncertaintyStats> stats,
                            const EscalationLossMatrix& loss) {
  detail::check_aligned(stats, loss);
  double total = 0.0;
  for (std::size_t i = 0; i < loss.n; ++i) {
    const Decision dec = decide(policy, stats[i]);
    total += detail::row_loss(loss, i, dec.answer ? *dec.answer : loss.k);
  }
  return total;
}

/// Tallies decisions against the ground truth recorded in the loss matrix.
inline ConfusionCounts tally(std::span<const Decision> decisions, std::span<const ClassLabel> labels) {
  if (decisions.size() != labels.size()) {
    throw Error(ErrorKind::MisalignedData, "decisions and labels differ in length");
  }
  ConfusionCounts counts;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& dec = decisions[i];
    if (labels[i]) {
      if (dec.escalated()) ++counts.relevant_escalated;
      else if (*dec.answer == *labels[i]) ++counts.relevant_correct;
      else ++counts.relevant_wrong;
    } else {
      if (dec.escalated()) ++counts.irrelevant_escalated;
      else ++counts.irrelevant_answered;
    }
  }
  return counts;
}

struct EntropyThresholdSolution {
  double b = 0.0;
  double objective = 0.0;
  std::size_t escalated_count = 0;
};

inline EntropyThresholdSolution solve_entropy_threshold(std::span<const UncertaintyStats> stats,
                                                        const EscalationLossMatrix& loss) {
  if (stats.empty()) throw Error(ErrorKind::EmptyInput, "no samples to learn an entropy cutoff from");
  const auto outcomes = detail::outcome_losses(stats, loss);
  const std::size_t n = stats.size();
  for (const auto& s : stats) {
    if (!std::isfinite(s.entropy) || s.entropy < 0.0) {
      throw Error(ErrorKind::InvariantViolation, "non-finite entropy for '" + s.sample_id + "'");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return stats[a].entropy > stats[b].entropy; });

  // Candidate j escalates the first escalate_counts[j] samples of `order`
  // (descending entropy); candidate 0 escalates nothing.
  struct Candidate {
    std::size_t escalate_count;
    double cutoff;
    double approx;
  };
  std::vector<Candidate> candidates;
  double running = std::accumulate(outcomes.answered.begin(), outcomes.answered.end(), 0.0);
  candidates.push_back({0, stats[order.front()].entropy + 1.0, running});
  for (std::size_t pos = 0; pos < n;) {
    const double level = stats[order[pos]].entropy;
    while (pos < n && stats[order[pos]].entropy == level) {
      running += outcomes.escalated[order[pos]] - outcomes.answered[order[pos]];
      ++pos;
    }
    candidates.push_back({pos, level, running});
  }

  double approx_min = std::numeric_limits<double>::infinity();
  for (const auto& cand : candidates) approx_min = std::min(approx_min, cand.approx);
  const double window = approx_min + detail::near_tolerance(approx_min);

  // Re-score near-optimal candidates with the canonical summation so the
  // reported objective is exactly evaluate_loss at the returned cutoff.
  // Candidates are already in increasing escalation count, so the first
  // strict minimum wins ties.
  EntropyThresholdSolution best;
  bool found = false;
  std::vector<char> escalate(n, 0);
  std::size_t marked = 0;
  for (const auto& cand : candidates) {
    for (; marked < cand.escalate_count; ++marked) escalate[order[marked]] = 1;
    if (cand.approx > window) continue;
    const double exact = outcomes.total(escalate);
    if (!found || exact < best.objective) {
      best = {cand.cutoff, exact, cand.escalate_count};
      found = true;
    }
  }
  return best;
}

struct DropoutThresholdSolution {
  double c = 0.0;
  double d = 1.0;
  double objective = 0.0;
};

namespace detail {

struct ArgmaxStats {
  std::vector<double> prob;
  std::vector<double> std_dev;
};

inline ArgmaxStats argmax_stats(std::span<const UncertaintyStats> stats, const OutcomeLosses& outcomes) {
  ArgmaxStats out;
  out.prob.resize(stats.size());
  out.std_dev.resize(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (!stats[i].has_std()) {
      throw Error(ErrorKind::MissingStd, "'" + stats[i].sample_id + "' has no std_devs");
    }
    out.prob[i] = stats[i].mean_probs[outcomes.argmax_class[i]];
    out.std_dev[i] = stats[i].std_devs[outcomes.argmax_class[i]];
  }
  return out;
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

inline DropoutThresholdSolution solve_dropout_thresholds(std::span<const UncertaintyStats> stats,
                                                         const EscalationLossMatrix& loss) {
  if (stats.empty()) throw Error(ErrorKind::EmptyInput, "no samples to learn dropout cutoffs from");
  const auto outcomes = detail::outcome_losses(stats, loss);
  const auto top = detail::argmax_stats(stats, outcomes);
  const std::size_t n = stats.size();

  std::vector<double> c_values = top.prob;
  c_values.push_back(0.0);
  c_values = detail::sorted_unique(std::move(c_values));
  std::vector<double> d_values = top.std_dev;
  d_values.push_back(1.0);
  d_values = detail::sorted_unique(std::move(d_values));

  std::vector<std::size_t> by_std(n);
  std::iota(by_std.begin(), by_std.end(), std::size_t{0});
  std::stable_sort(by_std.begin(), by_std.end(),
                   [&](std::size_t a, std::size_t b) { return top.std_dev[a] < top.std_dev[b]; });

  const double all_escalated = std::accumulate(outcomes.escalated.begin(), outcomes.escalated.end(), 0.0);

  // approx[ci * |D| + di]: objective of answering {P > c} and {V < d}.
  std::vector<double> approx(c_values.size() * d_values.size());
  double approx_min = std::numeric_limits<double>::infinity();
  for (std::size_t ci = 0; ci < c_values.size(); ++ci) {
    const double c = c_values[ci];
    double running = all_escalated;
    std::size_t pos = 0;
    for (std::size_t di = 0; di < d_values.size(); ++di) {
      const double d = d_values[di];
      for (; pos < n && top.std_dev[by_std[pos]] < d; ++pos) {
        const std::size_t i = by_std[pos];
        if (top.prob[i] > c) running += outcomes.answered[i] - outcomes.escalated[i];
      }
      approx[ci * d_values.size() + di] = running;
      approx_min = std::min(approx_min, running);
    }
  }
  const double window = approx_min + detail::near_tolerance(approx_min);

  // Tie order: smallest c, then largest d.
  DropoutThresholdSolution best;
  bool found = false;
  std::vector<char> escalate(n);
  for (std::size_t ci = 0; ci < c_values.size(); ++ci) {
    for (std::size_t di = d_values.size(); di-- > 0;) {
      if (approx[ci * d_values.size() + di] > window) continue;
      for (std::size_t i = 0; i < n; ++i) {
        escalate[i] = !(top.prob[i] > c_values[ci] && top.std_dev[i] < d_values[di]);
      }
      const double exact = outcomes.total(escalate);
      if (!found || exact < best.objective) {
        best = {c_values[ci], d_values[di], exact};
        found = true;
      }
    }
  }
  return best;
}

struct GridPoint {
  double c = 0.0;
  double d = 0.0;
  double objective = 0.0;
  double f1 = 0.0;
};

struct GridSearchResult {
  DropoutThresholdSolution best;
  std::size_t steps = 0;
  /// steps x steps points, c-major.
  std::vector<GridPoint> points;
};

/// Brute-force evaluation on a steps x steps lattice over [0,1]^2.
inline GridSearchResult grid_search_oracle(std::span<const UncertaintyStats> stats,
                                           const EscalationLossMatrix& loss, std::size_t steps) {
  if (steps < 2) throw Error(ErrorKind::BadConfig, "grid needs at least 2 steps per axis");
  if (stats.empty()) throw Error(ErrorKind::EmptyInput, "no samples for grid search");
  const auto outcomes = detail::outcome_losses(stats, loss);
  const auto top = detail::argmax_stats(stats, outcomes);
  const std::size_t n = stats.size();

  std::vector<ClassLabel> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (loss.relevant(i)) {
      const auto r = loss.row(i);
      truth[i] = static_cast<std::size_t>(std::find(r.begin(), r.end() - 1, 1.0) - r.begin());
    }
  }

  GridSearchResult out;
  out.steps = steps;
  out.points.reserve(steps * steps);
  const double step = 1.0 / static_cast<double>(steps - 1);
  std::vector<char> escalate(n);
  bool found = false;
  for (std::size_t ci = 0; ci < steps; ++ci) {
    const double c = ci == steps - 1 ? 1.0 : static_cast<double>(ci) * step;
    for (std::size_t di = 0; di < steps; ++di) {
      const double d = di == steps - 1 ? 1.0 : static_cast<double>(di) * step;
      ConfusionCounts counts;
      for (std::size_t i = 0; i < n; ++i) {
        escalate[i] = !(top.prob[i] > c && top.std_dev[i] < d);
        if (truth[i]) {
          if (escalate[i]) ++counts.relevant_escalated;
          else if (outcomes.argmax_class[i] == *truth[i]) ++counts.relevant_correct;
          else ++counts.relevant_wrong;
        } else {
          if (escalate[i]) ++counts.irrelevant_escalated;
          else ++counts.irrelevant_answered;
        }
      }
      out.points.push_back({c, d, outcomes.total(escalate), counts.f1()});
    }
  }
  // Same tie order as the sweep solver: smallest c, then largest d.
  for (std::size_t ci = 0; ci < steps; ++ci) {
    for (std::size_t di = steps; di-- > 0;) {
      const auto& p = out.points[ci * steps + di];
      if (!found || p.objective < out.best.objective) {
        out.best = {p.c, p.d, p.objective};
        found = true;
      }
    }
  }
  return out;
}

struct DeltaSweepRow {
  double delta = 0.0;
  double b = 0.0;
  std::size_t escalated_count = 0;
  double objective = 0.0;
};

/// Learned entropy cutoff as a function of the escalation cost.
inline std::vector<DeltaSweepRow> delta_sweep(std::span<const UncertaintyStats> stats,
                                              std::span<const ClassLabel> labels, std::size_t k,
                                              std::span<const double> deltas) {
  std::vector<DeltaSweepRow> rows;
  for (double delta : deltas) {
    const auto loss = build_loss_labels(labels, k, delta);
    const auto sol = solve_entropy_threshold(stats, loss);
    rows.push_back({delta, sol.b, sol.escalated_count, sol.objective});
  }
  return rows;
}

inline std::string_view to_string(PolicyMode mode) noexcept {
  switch (mode) {
    case PolicyMode::Entropy: return "entropy";
    case PolicyMode::Dropout: return "dropout";
    case PolicyMode::DummyClass: return "dummy";
  }
  return "entropy";
}

inline nlohmann::ordered_json policy_to_json(const ThresholdPolicy& p) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(p.mode));
  if (p.mode == PolicyMode::Entropy) j["b"] = p.b;
  if (p.mode == PolicyMode::Dropout) {
    j["c"] = p.c;
    j["d"] = p.d;
  }
  j["k"] = p.k;
  j["delta"] = p.delta;
  return j;
}

inline ThresholdPolicy policy_from_json(const nlohmann::json& j) {
  try {
    ThresholdPolicy p;
    const std::string mode = j.at("mode").get<std::string>();
    p.k = j.at("k").get<std::size_t>();
    p.delta = j.value("delta", kDefaultDelta);
    if (mode == "entropy") {
      p.mode = PolicyMode::Entropy;
      p.b = j.at("b").get<double>();
      if (p.b < 0.0) throw Error(ErrorKind::BadConfig, "b must be non-negative");
    } else if (mode == "dropout") {
      p.mode = PolicyMode::Dropout;
      p.c = j.at("c").get<double>();
      p.d = j.at("d").get<double>();
      if (p.c < 0.0 || p.c > 1.0 || p.d < 0.0 || p.d > 1.0) {
        throw Error(ErrorKind::BadConfig, "c and d must lie in [0,1]");
      }
    } else if (mode == "dummy") {
      p.mode = PolicyMode::DummyClass;
    } else {
      throw Error(ErrorKind::BadConfig, "unknown policy mode '" + mode + "'");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("policy JSON: ") + e.what());
  }
}

/// CSV with columns c,d,objective,f1 for contour plotting.
inline void write_grid_csv(std::ostream& os, const GridSearchResult& grid) {
  os << "c,d,objective,f1\n";
  char buf[128];
  for (const auto& p : grid.points) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.12g,%.12g\n", p.c, p.d, p.objective, p.f1);
    os << buf;
  }
}

}  // namespace escalada

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

#include <cstddef>

namespace escalada {

/// Outcome counts of an answer-or-escalate classifier. Binary metrics treat
/// relevant questions as positives and "answered" as the positive prediction.
struct ConfusionCounts {
  std::size_t relevant_correct = 0;
  std::size_t relevant_wrong = 0;
  std::size_t relevant_escalated = 0;
  std::size_t irrelevant_answered = 0;
  std::size_t irrelevant_escalated = 0;

  std::size_t relevant() const noexcept {
    return relevant_correct + relevant_wrong + relevant_escalated;
  }
  std::size_t irrelevant() const noexcept { return irrelevant_answered + irrelevant_escalated; }
  std::size_t total() const noexcept { return relevant() + irrelevant(); }

  /// Fraction of relevant questions answered with their true class.
  double class_accuracy() const noexcept {
    return relevant() ? static_cast<double>(relevant_correct) / static_cast<double>(relevant()) : 0.0;
  }
  /// Fraction of irrelevant questions routed to the escalation class.
  double escalation_accuracy() const noexcept {
    return irrelevant() ? static_cast<double>(irrelevant_escalated) / static_cast<double>(irrelevant())
                        : 0.0;
  }
  double precision() const noexcept {
    const std::size_t tp = relevant_correct + relevant_wrong;
    const std::size_t predicted = tp + irrelevant_answered;
    return predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  }
  double recall() const noexcept {
    const std::size_t tp = relevant_correct + relevant_wrong;
    return relevant() ? static_cast<double>(tp) / static_cast<double>(relevant()) : 0.0;
  }
  double f1() const noexcept { return harmonic_mean(precision(), recall()); }

  static double harmonic_mean(double p, double r) noexcept {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    relevant_correct += o.relevant_correct;
    relevant_wrong += o.relevant_wrong;
    relevant_escalated += o.relevant_escalated;
    irrelevant_answered += o.irrelevant_answered;
    irrelevant_escalated += o.irrelevant_escalated;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

}  // namespace escalada

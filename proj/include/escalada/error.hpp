// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace escalada {

/// Failure categories raised by the library. The CLI maps every `Error` to
/// exit code 1 (validation); anything else escaping is an internal error.
enum class ErrorKind {
  NonDistribution,
  EmptySamples,
  EmptyInput,
  BadDelta,
  BadLabel,
  MisalignedData,
  MissingStd,
  EmptyClass,
  BadConfig,
  ParseError,
  InvariantViolation,
  EmptyCorpus,
  UnknownMaskEntry,
  BadPattern,
  EmptySentence,
  ClockSkew,
  TooFewSamples,
  NotEnoughWords,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonDistribution: return "NonDistribution";
    case ErrorKind::EmptySamples: return "EmptySamples";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::BadDelta: return "BadDelta";
    case ErrorKind::BadLabel: return "BadLabel";
    case ErrorKind::MisalignedData: return "MisalignedData";
    case ErrorKind::MissingStd: return "MissingStd";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::UnknownMaskEntry: return "UnknownMaskEntry";
    case ErrorKind::BadPattern: return "BadPattern";
    case ErrorKind::EmptySentence: return "EmptySentence";
    case ErrorKind::ClockSkew: return "ClockSkew";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::NotEnoughWords: return "NotEnoughWords";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace escalada

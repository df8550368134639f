// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file spell.hpp
 * @brief OOV detection and masked-LM sentence completion.
 *
 * Out-of-vocabulary tokens are replaced by [MASK] and filled from the
 * scorer's ranked candidates, keeping only candidates within a small edit
 * distance of the original. Several OOVs are completed jointly by beam search
 * for small beams and independently otherwise.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "escalada/detail/text.hpp"
#include "escalada/error.hpp"
#include "escalada/lm.hpp"

namespace escalada {

/// Whitespace split with leading/trailing punctuation removed; case kept.
inline std::vector<std::string> tokenize_sentence(std::string_view sentence) {
  std::vector<std::string> out;
  for (const auto& raw : detail::split_whitespace(sentence)) {
    if (raw == detail::kMaskToken) {
      out.push_back(raw);
      continue;
    }
    const auto stripped = detail::strip_punct(raw);
    if (!stripped.empty()) out.emplace_back(stripped);
  }
  return out;
}

/// Optimal string alignment distance (adjacent transpositions count once).
inline std::size_t damerau_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      at(i, j) = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1, at(i - 1, j - 1) + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        at(i, j) = std::min(at(i, j), at(i - 2, j - 2) + 1);
      }
    }
  }
  return at(n, m);
}

struct VocabularyConfig {
  std::unordered_set<std::string> embedding_vocab;
  std::unordered_set<std::string> training_vocab;
  std::unordered_set<std::string> custom_vocab;
  std::vector<std::string> ignore_patterns;
  bool all_caps_rule = true;
  bool leading_digit_rule = true;

  /// Splits a "w1|w2|..." list into lowercase words.
  static std::unordered_set<std::string> parse_custom(std::string_view joined) {
    std::unordered_set<std::string> out;
    for (const auto& w : detail::split_on(joined, '|')) {
      const auto trimmed = detail::split_whitespace(w);
      for (const auto& t : trimmed) out.insert(detail::to_lower(t));
    }
    return out;
  }

  static std::unordered_set<std::string> lowercase_set(std::span<const std::string> words) {
    std::unordered_set<std::string> out;
    for (const auto& w : words) out.insert(detail::to_lower(w));
    return out;
  }
};

/// VocabularyConfig with its ignore patterns compiled.
class VocabularyMatcher {
 public:
  explicit VocabularyMatcher(VocabularyConfig config) : config_(std::move(config)) {
    for (const auto& pattern : config_.ignore_patterns) {
      try {
        patterns_.emplace_back(pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw Error(ErrorKind::BadPattern, "cannot compile '" + pattern + "': " + e.what());
      }
    }
  }

  bool in_vocabulary(std::string_view token) const {
    const std::string lower = detail::to_lower(token);
    if (config_.embedding_vocab.contains(lower) || config_.training_vocab.contains(lower) ||
        config_.custom_vocab.contains(lower)) {
      return true;
    }
    if (config_.all_caps_rule && is_all_caps(token)) return true;
    if (config_.leading_digit_rule && !token.empty() && std::isdigit(static_cast<unsigned char>(token.front()))) {
      return true;
    }
    const std::string s(token);
    return std::any_of(patterns_.begin(), patterns_.end(), [&](const std::regex& re) { return std::regex_match(s, re); });
  }

  const VocabularyConfig& config() const noexcept { return config_; }

  static bool is_all_caps(std::string_view token) {
    bool any_alpha = false;
    for (char c : token) {
      const auto u = static_cast<unsigned char>(c);
      if (std::isalpha(u)) {
        any_alpha = true;
        if (!std::isupper(u)) return false;
      }
    }
    return any_alpha;
  }

 private:
  VocabularyConfig config_;
  std::vector<std::regex> patterns_;
};

inline std::vector<std::size_t> detect_oov(std::span<const std::string> tokens, const VocabularyMatcher& vocab) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == detail::kMaskToken) continue;
    if (!vocab.in_vocabulary(tokens[i])) out.push_back(i);
  }
  return out;
}

inline std::vector<std::size_t> detect_oov(std::span<const std::string> tokens, const VocabularyConfig& vocab) {
  return detect_oov(tokens, VocabularyMatcher(vocab));
}

struct CompletionConfig {
  std::size_t m = 4000;
  std::size_t b = 4000;
  std::size_t max_edit_distance = 2;
  std::size_t v2_beam_cutoff = 100;

  void validate() const {
    if (m < 1) throw Error(ErrorKind::BadConfig, "m must be at least 1");
    if (b < 1) throw Error(ErrorKind::BadConfig, "beam size must be at least 1");
    if (max_edit_distance < 1) throw Error(ErrorKind::BadConfig, "max_edit_distance must be at least 1");
  }
};

struct Correction {
  std::size_t position = 0;
  std::string original;
  std::string replacement;
  double lm_probability = 0.0;
  std::size_t edit_distance = 0;

  friend bool operator==(const Correction&, const Correction&) = default;
};

enum class CompletionStrategy { Unchanged, Single, JointBeam, Independent };

inline std::string_view to_string(CompletionStrategy s) noexcept {
  switch (s) {
    case CompletionStrategy::Unchanged: return "unchanged";
    case CompletionStrategy::Single: return "single";
    case CompletionStrategy::JointBeam: return "joint-beam";
    case CompletionStrategy::Independent: return "independent";
  }
  return "?";
}

struct CompletionResult {
  std::vector<std::string> completed_tokens;
  std::vector<Correction> corrections;
  double perplexity = 0.0;
  CompletionStrategy strategy = CompletionStrategy::Unchanged;

  std::string sentence() const { return detail::join(completed_tokens, " "); }
};

namespace detail {

struct Qualified {
  std::string token;
  double prob = 0.0;
  std::size_t distance = 0;
};

// Candidates for `tokens[pos]` (already [MASK]) that may replace `original`.
// A literal [MASK] original accepts any candidate.
inline std::vector<Qualified> qualifying_candidates(const MaskedTokenScorer& scorer, std::span<const std::string> tokens,
                                                    std::size_t pos, std::string_view original,
                                                    const CompletionConfig& config) {
  std::vector<Qualified> out;
  const bool prediction_only = original == kMaskToken;
  const std::string norm = prediction_only ? std::string() : scorer.normalize(original);
  for (auto& c : scorer.top_m(tokens, pos, config.m)) {
    const std::size_t dist = prediction_only ? 0 : damerau_levenshtein(norm, c.token);
    if (prediction_only || dist <= config.max_edit_distance) out.push_back({std::move(c.token), c.prob, dist});
  }
  return out;
}

inline std::vector<std::size_t> sorted_targets(std::span<const std::size_t> positions, std::size_t n) {
  std::vector<std::size_t> t(positions.begin(), positions.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  if (!t.empty() && t.back() >= n) throw Error(ErrorKind::BadConfig, "OOV position out of range");
  return t;
}

inline void finish(CompletionResult& r, const MaskedTokenScorer& scorer) {
  r.perplexity = r.completed_tokens.empty() ? 1.0 : pseudo_perplexity(scorer, r.completed_tokens);
}

inline bool is_identity(const MaskedTokenScorer& scorer, std::string_view original, std::string_view replacement) {
  return original != kMaskToken && scorer.normalize(original) == replacement;
}

}  // namespace detail

/// Best candidate for the token at `position` given the rest of `context`.
/// Returns false when nothing qualifies.
inline bool best_replacement(const MaskedTokenScorer& scorer, std::span<const std::string> context,
                             std::size_t position, std::string_view original, const CompletionConfig& config,
                             Correction& out) {
  std::vector<std::string> masked(context.begin(), context.end());
  masked[position] = std::string(detail::kMaskToken);
  const auto cands = detail::qualifying_candidates(scorer, masked, position, original, config);
  if (cands.empty()) return false;
  out = {position, std::string(original), cands.front().token, cands.front().prob, cands.front().distance};
  return true;
}

inline CompletionResult complete_single(std::span<const std::string> tokens, std::size_t oov_position,
                                        const MaskedTokenScorer& scorer, const CompletionConfig& config) {
  config.validate();
  if (oov_position >= tokens.size()) throw Error(ErrorKind::BadConfig, "OOV position out of range");
  CompletionResult r;
  r.completed_tokens.assign(tokens.begin(), tokens.end());
  r.strategy = CompletionStrategy::Single;
  Correction c;
  if (best_replacement(scorer, tokens, oov_position, tokens[oov_position], config, c) &&
      !detail::is_identity(scorer, c.original, c.replacement)) {
    r.completed_tokens[oov_position] = c.replacement;
    r.corrections.push_back(std::move(c));
  }
  detail::finish(r, scorer);
  return r;
}

/// Each target is completed on the sentence with every other target masked.
inline CompletionResult complete_independent(std::span<const std::string> tokens,
                                             std::span<const std::size_t> oov_positions,
                                             const MaskedTokenScorer& scorer, const CompletionConfig& config) {
  config.validate();
  const auto targets = detail::sorted_targets(oov_positions, tokens.size());
  std::vector<std::string> masked(tokens.begin(), tokens.end());
  for (std::size_t p : targets) masked[p] = std::string(detail::kMaskToken);

  CompletionResult r;
  r.completed_tokens.assign(tokens.begin(), tokens.end());
  r.strategy = CompletionStrategy::Independent;
  for (std::size_t p : targets) {
    Correction c;
    if (best_replacement(scorer, masked, p, tokens[p], config, c) &&
        !detail::is_identity(scorer, c.original, c.replacement)) {
      r.completed_tokens[p] = c.replacement;
      r.corrections.push_back(std::move(c));
    }
  }
  detail::finish(r, scorer);
  return r;
}

/// Left-to-right beam search over the targets, scored by the sum of log
/// probabilities with earlier targets filled in and later ones masked.
inline CompletionResult complete_joint_beam(std::span<const std::string> tokens,
                                            std::span<const std::size_t> oov_positions,
                                            const MaskedTokenScorer& scorer, const CompletionConfig& config) {
  config.validate();
  const auto targets = detail::sorted_targets(oov_positions, tokens.size());

  struct Hypothesis {
    std::vector<std::string> tokens;
    std::vector<std::string> chosen;
    std::vector<Correction> corrections;
    double score = 0.0;
  };
  auto better = [](const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chosen < b.chosen;
  };

  Hypothesis start;
  start.tokens.assign(tokens.begin(), tokens.end());
  for (std::size_t p : targets) start.tokens[p] = std::string(detail::kMaskToken);
  std::vector<Hypothesis> beam{std::move(start)};
  const double log_floor = std::log(scorer.floor_probability());

  for (std::size_t p : targets) {
    const std::string& original = tokens[p];
    std::vector<Hypothesis> next;
    for (const auto& h : beam) {
      const auto cands = detail::qualifying_candidates(scorer, h.tokens, p, original, config);
      if (cands.empty()) {
        Hypothesis e = h;
        e.tokens[p] = original;
        e.chosen.push_back(original);
        e.score += log_floor;
        next.push_back(std::move(e));
        continue;
      }
      for (const auto& c : cands) {
        Hypothesis e = h;
        e.tokens[p] = c.token;
        e.chosen.push_back(c.token);
        e.score += std::log(c.prob);
        if (!detail::is_identity(scorer, original, c.token)) {
          e.corrections.push_back({p, original, c.token, c.prob, c.distance});
        } else {
          e.tokens[p] = original;
        }
        next.push_back(std::move(e));
      }
    }
    if (next.size() > config.b) {
      std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(config.b), next.end(), better);
      next.resize(config.b);
    } else {
      std::sort(next.begin(), next.end(), better);
    }
    beam = std::move(next);
  }

  CompletionResult r;
  r.strategy = CompletionStrategy::JointBeam;
  r.completed_tokens = std::move(beam.front().tokens);
  r.corrections = std::move(beam.front().corrections);
  detail::finish(r, scorer);
  return r;
}

/// OOV detection plus the size-based choice between joint and independent
/// completion. Literal [MASK] tokens are always filled.
inline CompletionResult complete(std::span<const std::string> tokens, const VocabularyMatcher& vocab,
                                 const MaskedTokenScorer& scorer, const CompletionConfig& config) {
  config.validate();
  auto targets = detect_oov(tokens, vocab);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == detail::kMaskToken) targets.push_back(i);
  }
  std::sort(targets.begin(), targets.end());
  if (targets.empty()) {
    CompletionResult r;
    r.completed_tokens.assign(tokens.begin(), tokens.end());
    detail::finish(r, scorer);
    return r;
  }
  if (targets.size() == 1) return complete_single(tokens, targets.front(), scorer, config);
  if (config.b <= config.v2_beam_cutoff) return complete_joint_beam(tokens, targets, scorer, config);
  return complete_independent(tokens, targets, scorer, config);
}

/// LM-free baseline: nearest dictionary word by edit distance, then higher
/// frequency, then lexicographic order. Keeps the token when nothing is within range.
class NearestWordCorrector {
 public:
  NearestWordCorrector(std::vector<std::pair<std::string, std::size_t>> word_frequencies, std::size_t max_edit_distance)
      : words_(std::move(word_frequencies)), max_distance_(max_edit_distance) {
    for (auto& [w, f] : words_) w = detail::to_lower(w);
  }

  std::string correct(std::string_view token) const {
    const std::string lower = detail::to_lower(token);
    const std::pair<std::string, std::size_t>* best = nullptr;
    std::size_t best_dist = std::numeric_limits<std::size_t>::max();
    for (const auto& entry : words_) {
      const std::size_t d = damerau_levenshtein(lower, entry.first);
      if (d > max_distance_) continue;
      if (!best || d < best_dist || (d == best_dist && (entry.second > best->second ||
                                                        (entry.second == best->second && entry.first < best->first)))) {
        best = &entry;
        best_dist = d;
      }
    }
    return best ? best->first : std::string(token);
  }

  std::vector<std::string> complete(std::span<const std::string> tokens, std::span<const std::size_t> targets) const {
    std::vector<std::string> out(tokens.begin(), tokens.end());
    for (std::size_t p : targets) out[p] = correct(tokens[p]);
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::size_t>> words_;
  std::size_t max_distance_;
};

/// JSON request/response wrapper:
///   {"sentence", "beamsize", "custom_vocab": "a|b" | null, "ignore_rule": regex | null}
///   -> {"completed", "perplexity", "corrections": [...]}
inline nlohmann::ordered_json handle_completion_request(const nlohmann::json& request, const VocabularyConfig& base,
                                                        const MaskedTokenScorer& scorer, CompletionConfig config) {
  if (!request.is_object() || !request.contains("sentence") || !request["sentence"].is_string()) {
    throw Error(ErrorKind::ParseError, "request needs a string \"sentence\"");
  }
  VocabularyConfig vocab = base;
  if (request.contains("beamsize") && !request["beamsize"].is_null()) {
    if (!request["beamsize"].is_number_integer() || request["beamsize"].get<long long>() < 1) {
      throw Error(ErrorKind::BadConfig, "\"beamsize\" must be a positive integer");
    }
    config.b = config.m = request["beamsize"].get<std::size_t>();
  }
  if (request.contains("custom_vocab") && request["custom_vocab"].is_string()) {
    for (auto& w : VocabularyConfig::parse_custom(request["custom_vocab"].get<std::string>())) {
      vocab.custom_vocab.insert(std::move(w));
    }
  }
  if (request.contains("ignore_rule") && request["ignore_rule"].is_string()) {
    vocab.ignore_patterns.push_back(request["ignore_rule"].get<std::string>());
  }
  const VocabularyMatcher matcher(std::move(vocab));
  const auto tokens = tokenize_sentence(request["sentence"].get<std::string>());
  if (tokens.empty()) throw Error(ErrorKind::EmptySentence, "sentence has no tokens");
  const auto result = complete(tokens, matcher, scorer, config);

  nlohmann::ordered_json out;
  out["completed"] = result.sentence();
  out["perplexity"] = result.perplexity;
  auto corrections = nlohmann::ordered_json::array();
  for (const auto& c : result.corrections) {
    nlohmann::ordered_json j;
    j["position"] = c.position;
    j["original"] = c.original;
    j["replacement"] = c.replacement;
    j["lm_probability"] = c.lm_probability;
    j["edit_distance"] = c.edit_distance;
    corrections.push_back(std::move(j));
  }
  out["corrections"] = std::move(corrections);
  out["strategy"] = std::string(to_string(result.strategy));
  return out;
}

}  // namespace escalada

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file lm.hpp
 * @brief Masked-token scorers used for sentence completion.
 *
 * `NgramScorer` is a count-based bidirectional stand-in: the probability of a
 * token at a masked slot is the renormalised product of a left-context and a
 * right-context n-gram model. `FileScorer` replays candidate lists exported
 * from a real masked language model (JSONL, see `load_lm_dump`).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
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

namespace escalada {

struct ScoredToken {
  std::string token;
  double prob = 0.0;

  friend bool operator==(const ScoredToken&, const ScoredToken&) = default;
};

class MaskedTokenScorer {
 public:
  virtual ~MaskedTokenScorer() = default;

  /// Ranked candidates for `tokens[mask_index]`, by non-increasing probability.
  virtual std::vector<ScoredToken> distribution(std::span<const std::string> tokens,
                                                std::size_t mask_index) const = 0;
  /// Probability charged to tokens the scorer cannot rank.
  virtual double floor_probability() const = 0;
  virtual bool in_vocabulary(std::string_view token) const = 0;
  /// Canonical form used to compare a surface token with candidates.
  virtual std::string normalize(std::string_view token) const { return std::string(token); }

  std::vector<ScoredToken> top_m(std::span<const std::string> tokens, std::size_t mask_index,
                                 std::size_t m) const {
    if (m < 1) throw Error(ErrorKind::BadConfig, "m must be at least 1");
    check_mask(tokens, mask_index);
    auto ranked = distribution(tokens, mask_index);
    if (ranked.size() > m) ranked.resize(m);
    return ranked;
  }

  /// log p of the actual token at `position`, with that position masked.
  /// Tokens the scorer cannot rank (or queries it has no entry for) get the floor.
  double token_logprob(std::span<const std::string> tokens, std::size_t position) const {
    if (position >= tokens.size()) throw Error(ErrorKind::BadConfig, "position out of range");
    std::vector<std::string> masked(tokens.begin(), tokens.end());
    masked[position] = std::string(detail::kMaskToken);
    const std::string target = normalize(tokens[position]);
    std::vector<ScoredToken> ranked;
    try {
      ranked = distribution(masked, position);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnknownMaskEntry) throw;
    }
    for (const auto& c : ranked) {
      if (c.token == target && c.prob > 0.0) return std::log(std::max(c.prob, floor_probability()));
    }
    return std::log(floor_probability());
  }

 protected:
  static void check_mask(std::span<const std::string> tokens, std::size_t mask_index) {
    if (mask_index >= tokens.size() || tokens[mask_index] != detail::kMaskToken) {
      throw Error(ErrorKind::BadConfig, "mask_index does not point at a [MASK] token");
    }
  }

  static void rank(std::vector<ScoredToken>& items) {
    std::sort(items.begin(), items.end(), [](const ScoredToken& a, const ScoredToken& b) {
      if (a.prob != b.prob) return a.prob > b.prob;
      return a.token < b.token;
    });
  }
};

struct NgramConfig {
  std::size_t order = 3;
  double smoothing = 0.01;
};

class NgramScorer final : public MaskedTokenScorer {
 public:
  NgramScorer(std::span<const std::string> corpus, NgramConfig config = {}) : config_(config) {
    if (config_.order < 2) throw Error(ErrorKind::BadConfig, "n-gram order must be at least 2");
    if (!(config_.smoothing >= 0.0)) throw Error(ErrorKind::BadConfig, "smoothing must be non-negative");
    std::vector<std::vector<std::uint32_t>> sentences;
    for (const auto& line : corpus) {
      std::vector<std::uint32_t> ids;
      for (const auto& tok : tokenize(line)) ids.push_back(intern(tok));
      if (!ids.empty()) sentences.push_back(std::move(ids));
    }
    if (sentences.empty()) throw Error(ErrorKind::EmptyCorpus, "n-gram corpus has no tokens");

    left_.resize(config_.order);
    right_.resize(config_.order);
    const std::size_t pad = config_.order - 1;
    for (const auto& s : sentences) {
      std::vector<std::uint32_t> padded(pad, kBos);
      padded.insert(padded.end(), s.begin(), s.end());
      padded.insert(padded.end(), pad, kEos);
      for (std::size_t i = pad; i < pad + s.size(); ++i) {
        const std::uint32_t w = padded[i];
        ++unigram_[w];
        ++total_tokens_;
        for (std::size_t len = 1; len < config_.order; ++len) {
          add(left_[len], context_key(padded, i, len, -1), w);
          add(right_[len], context_key(padded, i, len, +1), w);
        }
      }
    }
    const double v = static_cast<double>(vocab_.size());
    const double n = static_cast<double>(total_tokens_);
    floor_ = config_.smoothing > 0.0 ? config_.smoothing / (n + config_.smoothing * v) : 1.0 / (n + v);
  }

  /// Lowercased tokens with surrounding punctuation removed; [MASK] kept.
  static std::vector<std::string> tokenize(std::string_view sentence) {
    std::vector<std::string> out;
    for (const auto& raw : detail::split_whitespace(sentence)) {
      if (raw == detail::kMaskToken) {
        out.push_back(raw);
        continue;
      }
      const auto stripped = detail::strip_punct(raw);
      if (!stripped.empty()) out.push_back(detail::to_lower(stripped));
    }
    return out;
  }

  std::vector<ScoredToken> distribution(std::span<const std::string> tokens, std::size_t mask_index) const override {
    check_mask(tokens, mask_index);
    const std::size_t pad = config_.order - 1;
    std::vector<std::uint32_t> padded(pad, kBos);
    for (const auto& t : tokens) padded.push_back(lookup(t));
    padded.insert(padded.end(), pad, kEos);
    const std::size_t pos = mask_index + pad;

    const std::size_t v = vocab_.size();
    std::vector<double> left(v), right(v), joint(v);
    for (std::size_t level = pad + 1; level-- > 0;) {
      side_distribution(left_, padded, pos, level, -1, left);
      side_distribution(right_, padded, pos, level, +1, right);
      double mass = 0.0;
      for (std::size_t w = 0; w < v; ++w) {
        joint[w] = left[w] * right[w];
        mass += joint[w];
      }
      if (mass > 0.0) {
        std::vector<ScoredToken> out;
        out.reserve(v);
        for (std::size_t w = 0; w < v; ++w) {
          if (joint[w] > 0.0) out.push_back({vocab_[w], joint[w] / mass});
        }
        rank(out);
        return out;
      }
    }
    return {};
  }

  double floor_probability() const override { return floor_; }
  bool in_vocabulary(std::string_view token) const override { return ids_.contains(detail::to_lower(token)); }
  std::string normalize(std::string_view token) const override { return detail::to_lower(token); }

  const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
  std::size_t frequency(std::string_view token) const {
    const auto it = ids_.find(detail::to_lower(token));
    if (it == ids_.end()) return 0;
    const auto u = unigram_.find(it->second);
    return u == unigram_.end() ? 0 : u->second;
  }
  const NgramConfig& config() const noexcept { return config_; }

 private:
  static constexpr std::uint32_t kBos = 0xffff'fff0u;
  static constexpr std::uint32_t kEos = 0xffff'fff1u;
  static constexpr std::uint32_t kUnknown = 0xffff'fff2u;

  struct ContextCounts {
    std::size_t total = 0;
    std::unordered_map<std::uint32_t, std::size_t> next;
  };
  using Table = std::unordered_map<std::string, ContextCounts>;

  std::uint32_t intern(const std::string& tok) {
    const auto [it, inserted] = ids_.try_emplace(tok, static_cast<std::uint32_t>(vocab_.size()));
    if (inserted) vocab_.push_back(tok);
    return it->second;
  }

  std::uint32_t lookup(const std::string& tok) const {
    if (tok == detail::kMaskToken) return kUnknown;
    const auto it = ids_.find(detail::to_lower(tok));
    return it == ids_.end() ? kUnknown : it->second;
  }

  // Nearest-first context of `len` tokens on one side of position i.
  static std::string context_key(std::span<const std::uint32_t> padded, std::size_t i, std::size_t len, int dir) {
    std::string key(len * sizeof(std::uint32_t), '\0');
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t at = dir < 0 ? i - 1 - j : i + 1 + j;
      std::memcpy(key.data() + j * sizeof(std::uint32_t), &padded[at], sizeof(std::uint32_t));
    }
    return key;
  }

  static void add(Table& table, const std::string& key, std::uint32_t w) {
    auto& c = table[key];
    ++c.total;
    ++c.next[w];
  }

  // Add-k estimate from the longest context of length <= level with data.
  void side_distribution(const std::vector<Table>& tables, std::span<const std::uint32_t> padded, std::size_t pos,
                         std::size_t level, int dir, std::vector<double>& out) const {
    const double k = config_.smoothing;
    const double v = static_cast<double>(vocab_.size());
    for (std::size_t len = level; len > 0; --len) {
      const auto it = tables[len].find(context_key(padded, pos, len, dir));
      if (it == tables[len].end() || it->second.total == 0) continue;
      const double denom = static_cast<double>(it->second.total) + k * v;
      std::fill(out.begin(), out.end(), k / denom);
      for (const auto& [w, c] : it->second.next) {
        if (w < out.size()) out[w] = (static_cast<double>(c) + k) / denom;
      }
      return;
    }
    const double denom = static_cast<double>(total_tokens_) + k * v;
    std::fill(out.begin(), out.end(), k / denom);
    for (const auto& [w, c] : unigram_) out[w] = (static_cast<double>(c) + k) / denom;
  }

  NgramConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::unordered_map<std::uint32_t, std::size_t> unigram_;
  std::size_t total_tokens_ = 0;
  std::vector<Table> left_;   // indexed by context length
  std::vector<Table> right_;
  double floor_ = 0.0;
};

/// One exported candidate list: `sentence` contains literal [MASK] tokens and
/// `mask_index` is the whitespace-token index of the slot being scored.
struct LmDumpEntry {
  std::string sentence;
  std::size_t mask_index = 0;
  std::vector<std::pair<std::string, double>> candidates;  // (token, logprob)
};

inline std::string lm_entry_key(std::span<const std::string> tokens, std::size_t mask_index) {
  return detail::join(tokens, " ") + '\t' + std::to_string(mask_index);
}

inline std::vector<LmDumpEntry> load_lm_dump(std::istream& in) {
  std::vector<LmDumpEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    return Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(e.what());
    }
    if (!obj.is_object() || !obj.contains("sentence") || !obj.contains("mask_index") ||
        !obj.contains("candidates")) {
      throw fail("expected {\"sentence\", \"mask_index\", \"candidates\"}");
    }
    if (!obj["sentence"].is_string()) throw fail("\"sentence\" must be a string");
    if (!obj["mask_index"].is_number_integer() || obj["mask_index"].get<long long>() < 0) {
      throw fail("\"mask_index\" must be a non-negative integer");
    }
    if (!obj["candidates"].is_array()) throw fail("\"candidates\" must be an array");
    LmDumpEntry e;
    e.sentence = obj["sentence"].get<std::string>();
    e.mask_index = obj["mask_index"].get<std::size_t>();
    const auto tokens = detail::split_whitespace(e.sentence);
    if (e.mask_index >= tokens.size() || tokens[e.mask_index] != detail::kMaskToken) {
      throw fail("mask_index does not point at a [MASK] token");
    }
    double prev = 0.0;
    for (const auto& c : obj["candidates"]) {
      if (!c.is_object() || !c.contains("t") || !c.contains("lp") || !c["t"].is_string() || !c["lp"].is_number()) {
        throw fail("candidate must be {\"t\": string, \"lp\": number}");
      }
      const double lp = c["lp"].get<double>();
      if (!(lp <= 0.0)) throw fail("logprob must be <= 0");
      if (!e.candidates.empty() && lp > prev) throw fail("candidates not sorted by non-increasing logprob");
      prev = lp;
      e.candidates.emplace_back(c["t"].get<std::string>(), lp);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<LmDumpEntry> load_lm_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  return load_lm_dump(in);
}

inline void write_lm_dump(std::ostream& out, std::span<const LmDumpEntry> entries) {
  for (const auto& e : entries) {
    nlohmann::ordered_json obj;
    obj["sentence"] = e.sentence;
    obj["mask_index"] = e.mask_index;
    auto cands = nlohmann::ordered_json::array();
    for (const auto& [t, lp] : e.candidates) {
      nlohmann::ordered_json c;
      c["t"] = t;
      c["lp"] = lp;
      cands.push_back(std::move(c));
    }
    obj["candidates"] = std::move(cands);
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing lm dump");
}

class FileScorer final : public MaskedTokenScorer {
 public:
  explicit FileScorer(std::vector<LmDumpEntry> entries) {
    double min_lp = 0.0;
    bool any = false;
    for (auto& e : entries) {
      const auto tokens = detail::split_whitespace(e.sentence);
      std::vector<ScoredToken> ranked;
      std::unordered_set<std::string> seen;
      for (const auto& [t, lp] : e.candidates) {
        if (!seen.insert(t).second) continue;
        ranked.push_back({t, std::exp(lp)});
        vocab_.insert(t);
        if (!any || lp < min_lp) min_lp = lp;
        any = true;
      }
      table_[lm_entry_key(tokens, e.mask_index)] = std::move(ranked);
    }
    floor_ = any ? std::exp(min_lp) : std::numeric_limits<double>::min();
    if (floor_ <= 0.0) floor_ = std::numeric_limits<double>::min();
  }

  static FileScorer from_file(const std::string& path) { return FileScorer(load_lm_dump(path)); }

  std::vector<ScoredToken> distribution(std::span<const std::string> tokens, std::size_t mask_index) const override {
    check_mask(tokens, mask_index);
    const auto it = table_.find(lm_entry_key(tokens, mask_index));
    if (it == table_.end()) {
      throw Error(ErrorKind::UnknownMaskEntry,
                  "no dump entry for '" + detail::join(tokens, " ") + "' at " + std::to_string(mask_index));
    }
    return it->second;
  }

  double floor_probability() const override { return floor_; }
  bool in_vocabulary(std::string_view token) const override { return vocab_.contains(std::string(token)); }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::unordered_map<std::string, std::vector<ScoredToken>> table_;
  std::unordered_set<std::string> vocab_;
  double floor_ = 0.0;
};

/// exp(-mean token log-probability) of a sentence under the scorer.
inline double pseudo_perplexity(const MaskedTokenScorer& scorer, std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(ErrorKind::EmptySentence, "pseudo-perplexity of an empty sentence");
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) total += scorer.token_logprob(tokens, i);
  return std::exp(-total / static_cast<double>(tokens.size()));
}

}  // namespace escalada

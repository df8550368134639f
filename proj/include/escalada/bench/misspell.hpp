// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "escalada/detail/rng.hpp"
#include "escalada/detail/text.hpp"
#include "escalada/error.hpp"

namespace escalada::bench {

struct Misspelling {
  std::string text;
  std::vector<std::size_t> altered_words;  // whitespace-word indices
};

namespace detail_misspell {

struct Core {
  std::size_t begin = 0;
  std::size_t length = 0;
};

inline Core core_of(std::string_view word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  while (b < e && escalada::detail::is_punct(word[b])) ++b;
  while (e > b && escalada::detail::is_punct(word[e - 1])) --e;
  return {b, e - b};
}

inline bool eligible(std::string_view core) {
  if (core.size() < 2) return false;
  if (std::isdigit(static_cast<unsigned char>(core.front()))) return false;
  bool any_alpha = false;
  bool all_upper = true;
  for (char c : core) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      any_alpha = true;
      if (!std::isupper(u)) all_upper = false;
    }
  }
  if (any_alpha && all_upper) return false;
  return std::any_of(core.begin(), core.end(), [&](char c) { return c != core.front(); });
}

}  // namespace detail_misspell

/// Swaps two distinct character positions in the longest eligible word, then
/// the next longest, for `count` words. All-caps and digit-led tokens are left
/// alone. Ties in length go to the earlier word.
inline Misspelling gen_misspellings(std::string_view text, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::BadConfig, "count must be at least 1");
  auto words = escalada::detail::split_whitespace(text);
  std::vector<std::pair<std::size_t, std::size_t>> candidates;  // (length, index)
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto core = detail_misspell::core_of(words[i]);
    if (detail_misspell::eligible(std::string_view(words[i]).substr(core.begin, core.length))) {
      candidates.emplace_back(core.length, i);
    }
  }
  if (candidates.size() < count) {
    throw Error(ErrorKind::NotEnoughWords, "need " + std::to_string(count) + " eligible words, found " +
                                               std::to_string(candidates.size()));
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  escalada::detail::Rng rng(seed);
  Misspelling out;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t wi = candidates[k].second;
    auto& w = words[wi];
    const auto core = detail_misspell::core_of(w);
    char* c = w.data() + core.begin;
    const std::size_t n = core.length;
    std::size_t i = 0;
    std::size_t j = 0;
    bool found = false;
    for (int attempt = 0; attempt < 10 && !found; ++attempt) {
      i = rng.below(n);
      j = rng.below(n - 1);
      if (j >= i) ++j;
      found = c[i] != c[j];
    }
    if (!found) {
      // Deterministic fallback: first position differing from the first character.
      i = 0;
      j = 1;
      while (c[j] == c[0]) ++j;
    }
    std::swap(c[i], c[j]);
    out.altered_words.push_back(wi);
  }
  std::sort(out.altered_words.begin(), out.altered_words.end());
  out.text = escalada::detail::join(words, " ");
  return out;
}

}  // namespace escalada::bench

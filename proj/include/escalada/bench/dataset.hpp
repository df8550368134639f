// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "escalada/detail/csv.hpp"
#include "escalada/detail/text.hpp"
#include "escalada/error.hpp"

namespace escalada::bench {

/// Tier 3 is the finest label; single-tier data leaves tiers 1 and 2 empty.
struct TieredLabel {
  std::string tier1;
  std::string tier2;
  std::string tier3;

  const std::string& at(int tier) const {
    switch (tier) {
      case 1: return tier1;
      case 2: return tier2;
      case 3: return tier3;
      default: throw Error(ErrorKind::BadConfig, "tier must be 1, 2 or 3");
    }
  }
  friend bool operator==(const TieredLabel&, const TieredLabel&) = default;
};

struct RelevantSample {
  std::string id;
  std::string text;
  TieredLabel label;
};

struct IrrelevantSample {
  std::string id;
  std::string text;
};

struct LabeledDataset {
  std::vector<RelevantSample> relevant;
  std::vector<IrrelevantSample> irrelevant;
  std::vector<std::string> warnings;

  /// Sorted distinct labels at a tier.
  std::vector<std::string> label_space(int tier = 3) const {
    std::set<std::string> labels;
    for (const auto& r : relevant) {
      const auto& l = r.label.at(tier);
      if (l.empty()) throw Error(ErrorKind::BadConfig, "dataset has no tier-" + std::to_string(tier) + " labels");
      labels.insert(l);
    }
    return {labels.begin(), labels.end()};
  }

  /// Class index of every relevant sample at `tier`, against label_space(tier).
  std::vector<std::size_t> class_indices(int tier = 3) const {
    const auto space = label_space(tier);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < space.size(); ++i) index[space[i]] = i;
    std::vector<std::size_t> out;
    out.reserve(relevant.size());
    for (const auto& r : relevant) out.push_back(index.at(r.label.at(tier)));
    return out;
  }
};

inline bool is_out_of_scope_label(std::string_view label) { return label == "__oos__" || label == "oos"; }

/// Checks tier nesting and ids; duplicate texts are reported as warnings.
inline void validate_dataset(LabeledDataset& ds) {
  std::unordered_map<std::string, std::string> parent3;
  std::unordered_map<std::string, std::string> parent2;
  for (const auto& r : ds.relevant) {
    if (r.label.tier3.empty()) throw Error(ErrorKind::ParseError, "sample '" + r.id + "' has no label");
    if (!r.label.tier2.empty()) {
      const auto [it, fresh] = parent3.try_emplace(r.label.tier3, r.label.tier2);
      if (!fresh && it->second != r.label.tier2) {
        throw Error(ErrorKind::InvariantViolation,
                    "tier-3 label '" + r.label.tier3 + "' sits under two tier-2 labels");
      }
    }
    if (!r.label.tier1.empty() && !r.label.tier2.empty()) {
      const auto [it, fresh] = parent2.try_emplace(r.label.tier2, r.label.tier1);
      if (!fresh && it->second != r.label.tier1) {
        throw Error(ErrorKind::InvariantViolation,
                    "tier-2 label '" + r.label.tier2 + "' sits under two tier-1 labels");
      }
    }
  }
  std::unordered_set<std::string> ids;
  std::unordered_map<std::string, std::size_t> texts;
  auto see = [&](const std::string& id, const std::string& text) {
    if (!ids.insert(id).second) throw Error(ErrorKind::InvariantViolation, "duplicate sample id '" + id + "'");
    if (++texts[text] == 2) ds.warnings.push_back("DuplicateText: '" + text + "'");
  };
  for (const auto& r : ds.relevant) see(r.id, r.text);
  for (const auto& r : ds.irrelevant) see(r.id, r.text);
}

namespace detail_ds {

inline void add_row(LabeledDataset& ds, std::string id, std::string text, TieredLabel label) {
  if (is_out_of_scope_label(label.tier3)) {
    if (id.empty()) id = "oos-" + std::to_string(ds.irrelevant.size());
    ds.irrelevant.push_back({std::move(id), std::move(text)});
  } else {
    if (id.empty()) id = "rel-" + std::to_string(ds.relevant.size());
    ds.relevant.push_back({std::move(id), std::move(text), std::move(label)});
  }
}

}  // namespace detail_ds

/// CSV with a header: text + label, or text + tier1,tier2,tier3; `id` optional.
inline LabeledDataset load_dataset_csv(std::istream& in) {
  escalada::detail::CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw Error(ErrorKind::ParseError, "empty CSV");
  int col_text = -1, col_label = -1, col_t1 = -1, col_t2 = -1, col_t3 = -1, col_id = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = escalada::detail::to_lower(header[i]);
    int* slot = name == "text"    ? &col_text
                : name == "label" ? &col_label
                : name == "tier1" ? &col_t1
                : name == "tier2" ? &col_t2
                : name == "tier3" ? &col_t3
                : name == "id"    ? &col_id
                                  : nullptr;
    if (!slot) throw Error(ErrorKind::ParseError, "unknown column '" + header[i] + "'");
    if (*slot >= 0) throw Error(ErrorKind::ParseError, "duplicate column '" + header[i] + "'");
    *slot = static_cast<int>(i);
  }
  if (col_text < 0) throw Error(ErrorKind::ParseError, "missing column 'text'");
  if (col_label >= 0 && col_t3 >= 0) throw Error(ErrorKind::ParseError, "use either 'label' or tier columns");
  if (col_label < 0 && col_t3 < 0) throw Error(ErrorKind::ParseError, "missing column 'label' (or 'tier3')");

  LabeledDataset ds;
  std::vector<std::string> row;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw Error(ErrorKind::ParseError, reader.where() + "expected " + std::to_string(header.size()) + " fields");
    }
    auto get = [&](int c) { return c >= 0 ? row[static_cast<std::size_t>(c)] : std::string(); };
    TieredLabel label;
    label.tier3 = col_label >= 0 ? get(col_label) : get(col_t3);
    if (!is_out_of_scope_label(label.tier3)) {
      label.tier1 = get(col_t1);
      label.tier2 = get(col_t2);
    }
    if (label.tier3.empty()) throw Error(ErrorKind::ParseError, reader.where() + "empty label");
    detail_ds::add_row(ds, get(col_id), get(col_text), std::move(label));
  }
  validate_dataset(ds);
  return ds;
}

/// CLINC-style {"train": [[text, label], ...], "oos_train": ..., ...} or an
/// array of {"text", "label" | "tier1".."tier3", "id"?} objects.
inline LabeledDataset load_dataset_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  LabeledDataset ds;
  auto string_field = [](const nlohmann::json& obj, const char* key) -> std::string {
    if (!obj.contains(key)) return {};
    if (!obj[key].is_string()) throw Error(ErrorKind::ParseError, std::string("field '") + key + "' must be a string");
    return obj[key].get<std::string>();
  };
  if (doc.is_object()) {
    static constexpr const char* kSplits[] = {"train", "val", "test", "oos_train", "oos_val", "oos_test"};
    for (const auto& [key, value] : doc.items()) {
      if (std::find(std::begin(kSplits), std::end(kSplits), key) == std::end(kSplits)) {
        throw Error(ErrorKind::ParseError, "unknown section '" + key + "'");
      }
    }
    for (const char* split : kSplits) {
      if (!doc.contains(split)) continue;
      if (!doc[split].is_array()) throw Error(ErrorKind::ParseError, std::string("section '") + split + "' must be an array");
      for (const auto& pair : doc[split]) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          throw Error(ErrorKind::ParseError, std::string("section '") + split + "' entries must be [text, label]");
        }
        detail_ds::add_row(ds, {}, pair[0].get<std::string>(), {{}, {}, pair[1].get<std::string>()});
      }
    }
  } else if (doc.is_array()) {
    for (const auto& obj : doc) {
      if (!obj.is_object()) throw Error(ErrorKind::ParseError, "array entries must be objects");
      for (const auto& [key, value] : obj.items()) {
        if (key != "text" && key != "label" && key != "tier1" && key != "tier2" && key != "tier3" && key != "id") {
          throw Error(ErrorKind::ParseError, "unknown field '" + key + "'");
        }
      }
      TieredLabel label;
      label.tier3 = obj.contains("label") ? string_field(obj, "label") : string_field(obj, "tier3");
      if (!is_out_of_scope_label(label.tier3)) {
        label.tier1 = string_field(obj, "tier1");
        label.tier2 = string_field(obj, "tier2");
      }
      if (label.tier3.empty()) throw Error(ErrorKind::ParseError, "entry without label");
      detail_ds::add_row(ds, string_field(obj, "id"), string_field(obj, "text"), std::move(label));
    }
  } else {
    throw Error(ErrorKind::ParseError, "dataset JSON must be an object or an array");
  }
  validate_dataset(ds);
  return ds;
}

enum class DatasetFormat { Auto, Csv, Json };

inline LabeledDataset load_dataset(const std::string& path, DatasetFormat format = DatasetFormat::Auto) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  if (format == DatasetFormat::Auto) {
    format = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0 ? DatasetFormat::Json
                                                                                  : DatasetFormat::Csv;
  }
  return format == DatasetFormat::Json ? load_dataset_json(in) : load_dataset_csv(in);
}

inline void write_dataset_csv(std::ostream& out, const LabeledDataset& ds) {
  using escalada::detail::csv_escape;
  out << "id,text,tier1,tier2,tier3\n";
  for (const auto& r : ds.relevant) {
    out << csv_escape(r.id) << ',' << csv_escape(r.text) << ',' << csv_escape(r.label.tier1) << ','
        << csv_escape(r.label.tier2) << ',' << csv_escape(r.label.tier3) << '\n';
  }
  for (const auto& r : ds.irrelevant) out << csv_escape(r.id) << ',' << csv_escape(r.text) << ",,,__oos__\n";
}

}  // namespace escalada::bench

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

// JSONL prediction dumps, one object per line:
//   {"id": "...", "label": "<class name>" | "__oos__", "probs": [K floats]}
// MC dumps add "samples": [[K floats], ...].

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "escalada/error.hpp"
#include "escalada/prediction.hpp"

namespace escalada {

inline constexpr std::string_view kOosLabel = "__oos__";

struct PredictionDump {
  PredictionSet set;
  /// Present only for rows that carried "samples"; same order as set.rows.
  std::vector<McSampleSet> mc;
};

/// Resolves a label string. With `label_names` the string must name a class;
/// without, it must be a decimal class index.
inline ClassLabel parse_class_label(std::string_view label, std::span<const std::string> label_names,
                                    std::size_t k) {
  if (label == kOosLabel) return kIrrelevant;
  if (!label_names.empty()) {
    for (std::size_t c = 0; c < label_names.size(); ++c) {
      if (label_names[c] == label) return c;
    }
    throw Error(ErrorKind::BadLabel, "unknown class name '" + std::string(label) + "'");
  }
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), idx);
  if (ec != std::errc{} || ptr != label.data() + label.size()) {
    throw Error(ErrorKind::BadLabel,
                "label '" + std::string(label) + "' is not a class index and no label names were given");
  }
  if (idx >= k) throw Error(ErrorKind::BadLabel, "class index out of range: " + std::string(label));
  return idx;
}

inline std::string format_class_label(const ClassLabel& label, std::span<const std::string> label_names) {
  if (!label) return std::string(kOosLabel);
  if (*label < label_names.size()) return label_names[*label];
  return std::to_string(*label);
}

inline PredictionDump load_prediction_dump(std::istream& in, std::span<const std::string> label_names = {}) {
  PredictionDump dump;
  dump.set.label_names.assign(label_names.begin(), label_names.end());
  std::string line;
  std::size_t line_no = 0;
  auto parse_error = [&](const std::string& what) {
    return Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw parse_error(e.what());
    }
    if (!obj.is_object()) throw parse_error("expected a JSON object");
    for (const char* field : {"id", "label", "probs"}) {
      if (!obj.contains(field)) throw parse_error(std::string("missing field \"") + field + "\"");
    }
    if (!obj["id"].is_string()) throw parse_error("\"id\" must be a string");
    if (!obj["label"].is_string()) throw parse_error("\"label\" must be a string");

    PredictionRow row;
    row.sample_id = obj["id"].get<std::string>();
    try {
      row.probs = obj["probs"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw parse_error("\"probs\" must be an array of numbers");
    }
    if (dump.set.k == 0) dump.set.k = row.probs.size();
    if (row.probs.size() != dump.set.k) {
      throw Error(ErrorKind::InvariantViolation, "row '" + row.sample_id + "' has " +
                                                     std::to_string(row.probs.size()) + " classes, expected " +
                                                     std::to_string(dump.set.k));
    }
    try {
      check_distribution(row.probs);
      row.true_label = parse_class_label(obj["label"].get<std::string>(), label_names, dump.set.k);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvariantViolation, "row '" + row.sample_id + "': " + e.what());
    }

    if (obj.contains("samples")) {
      McSampleSet mc;
      mc.sample_id = row.sample_id;
      try {
        mc.samples = obj["samples"].get<std::vector<std::vector<double>>>();
      } catch (const nlohmann::json::exception&) {
        throw parse_error("\"samples\" must be an array of arrays of numbers");
      }
      if (mc.samples.empty()) throw Error(ErrorKind::InvariantViolation, "row '" + row.sample_id + "': empty samples");
      for (const auto& s : mc.samples) {
        if (s.size() != dump.set.k) {
          throw Error(ErrorKind::InvariantViolation, "row '" + row.sample_id + "': sample has wrong K");
        }
        try {
          check_distribution(s);
        } catch (const Error& e) {
          throw Error(ErrorKind::InvariantViolation, "row '" + row.sample_id + "': " + e.what());
        }
      }
      dump.mc.push_back(std::move(mc));
    }
    dump.set.rows.push_back(std::move(row));
  }
  if (dump.set.rows.empty()) throw Error(ErrorKind::EmptyInput, "prediction dump has no rows");
  validate(dump.set);
  return dump;
}

inline PredictionDump load_prediction_dump(const std::string& path, std::span<const std::string> label_names = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  return load_prediction_dump(in, label_names);
}

inline void write_prediction_dump(std::ostream& out, const PredictionSet& set, std::span<const McSampleSet> mc = {}) {
  std::unordered_map<std::string, const McSampleSet*> by_id;
  for (const auto& m : mc) by_id[m.sample_id] = &m;
  for (const auto& row : set.rows) {
    nlohmann::ordered_json obj;
    obj["id"] = row.sample_id;
    obj["label"] = format_class_label(row.true_label, set.label_names);
    obj["probs"] = row.probs;
    if (const auto it = by_id.find(row.sample_id); it != by_id.end()) obj["samples"] = it->second->samples;
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing prediction dump");
}

inline void write_prediction_dump(const std::string& path, const PredictionSet& set,
                                  std::span<const McSampleSet> mc = {}) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  write_prediction_dump(out, set, mc);
}

}  // namespace escalada

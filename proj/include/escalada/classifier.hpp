// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file classifier.hpp
 * @brief Intent classifier backends.
 *
 * `BowClassifier` is a desk-scale stand-in for a fine-tuned transformer:
 * hashed bag-of-words features -> one ReLU hidden layer -> softmax, trained
 * with mini-batch SGD on cross-entropy and inverted dropout on the hidden
 * layer. Keeping dropout active at inference (`mc_predict`) gives the Monte
 * Carlo samples the dropout thresholds are learned from.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "escalada/detail/rng.hpp"
#include "escalada/detail/text.hpp"
#include "escalada/error.hpp"
#include "escalada/prediction.hpp"

namespace escalada {

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;

  virtual std::size_t k() const = 0;
  virtual const std::vector<std::string>& label_names() const = 0;
  /// Deterministic class distribution for one input.
  virtual std::vector<double> predict(std::string_view input) const = 0;
  /// S stochastic passes; reproducible for a given seed.
  virtual McSampleSet mc_predict(std::string_view input, std::size_t s, std::uint64_t seed) const = 0;
};

struct BowClassifierConfig {
  std::size_t feature_dim = 32768;
  std::size_t hidden_units = 256;
  double dropout_ratio = 0.1;
  std::size_t epochs = 30;
  double learning_rate = 0.1;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;

  void validate() const {
    if (feature_dim == 0 || (feature_dim & (feature_dim - 1)) != 0) {
      throw Error(ErrorKind::BadConfig, "feature_dim must be a power of two");
    }
    if (hidden_units == 0) throw Error(ErrorKind::BadConfig, "hidden_units must be positive");
    if (!(dropout_ratio >= 0.0 && dropout_ratio < 1.0)) {
      throw Error(ErrorKind::BadConfig, "dropout_ratio must lie in [0,1)");
    }
    if (epochs < 1) throw Error(ErrorKind::BadConfig, "epochs must be at least 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::BadConfig, "learning_rate must be positive");
    if (batch_size < 1) throw Error(ErrorKind::BadConfig, "batch_size must be at least 1");
  }
};

struct LabeledText {
  std::string text;
  std::size_t label = 0;
};

class BowClassifier final : public ClassifierBackend {
 public:
  static constexpr std::uint64_t kFeatureSalt = 0x5eed'ab1e'f00d'2026ULL;

  static BowClassifier train(std::span<const LabeledText> corpus, std::vector<std::string> label_names,
                             const BowClassifierConfig& config) {
    config.validate();
    const std::size_t k = label_names.size();
    if (k < 2) throw Error(ErrorKind::BadConfig, "need at least two classes");
    std::vector<std::size_t> per_class(k, 0);
    for (const auto& ex : corpus) {
      if (ex.label >= k) throw Error(ErrorKind::BadLabel, "label index out of range: " + std::to_string(ex.label));
      ++per_class[ex.label];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (per_class[c] == 0) throw Error(ErrorKind::EmptyClass, "class '" + label_names[c] + "' has no examples");
    }

    BowClassifier model(config, std::move(label_names));
    model.initialize();
    model.fit(corpus);
    return model;
  }

  std::size_t k() const override { return label_names_.size(); }
  const std::vector<std::string>& label_names() const override { return label_names_; }
  const BowClassifierConfig& config() const noexcept { return config_; }
  std::uint64_t feature_salt() const noexcept { return salt_; }

  std::vector<double> predict(std::string_view text) const override {
    const auto features = featurize(text);
    std::vector<float> hidden(config_.hidden_units);
    forward_hidden(features, hidden);
    return softmax_output(hidden);
  }

  McSampleSet mc_predict(std::string_view text, std::size_t s, std::uint64_t seed) const override {
    McSampleSet out;
    out.sample_id = std::string(text);
    const auto features = featurize(text);
    std::vector<float> hidden(config_.hidden_units);
    forward_hidden(features, hidden);
    detail::Rng rng(seed);
    std::vector<float> dropped(hidden.size());
    out.samples.reserve(s);
    for (std::size_t pass = 0; pass < s; ++pass) {
      apply_dropout(hidden, dropped, rng);
      out.samples.push_back(softmax_output(dropped));
    }
    return out;
  }

  /// Raw parameter views, mainly for reproducibility checks.
  std::span<const float> input_weights() const noexcept { return w1_; }
  std::span<const float> output_weights() const noexcept { return w2_; }

  void save(std::ostream& os) const {
    os.write(kMagic, sizeof kMagic);
    write_u64(os, config_.feature_dim);
    write_u64(os, config_.hidden_units);
    write_f64(os, config_.dropout_ratio);
    write_u64(os, config_.epochs);
    write_f64(os, config_.learning_rate);
    write_u64(os, config_.batch_size);
    write_u64(os, config_.seed);
    write_u64(os, salt_);
    write_u64(os, label_names_.size());
    for (const auto& name : label_names_) {
      write_u64(os, name.size());
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    write_floats(os, w1_);
    write_floats(os, b1_);
    write_floats(os, w2_);
    write_floats(os, b2_);
    if (!os) throw Error(ErrorKind::IoError, "failed writing classifier model");
  }

  static BowClassifier load(std::istream& is) {
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
      throw Error(ErrorKind::ParseError, "not an escalada classifier model");
    }
    BowClassifierConfig config;
    config.feature_dim = read_u64(is);
    config.hidden_units = read_u64(is);
    config.dropout_ratio = read_f64(is);
    config.epochs = read_u64(is);
    config.learning_rate = read_f64(is);
    config.batch_size = read_u64(is);
    config.seed = read_u64(is);
    config.validate();
    const std::uint64_t salt = read_u64(is);
    const std::uint64_t k = read_u64(is);
    if (k < 2 || k > (1u << 20)) throw Error(ErrorKind::ParseError, "implausible class count");
    std::vector<std::string> names(k);
    for (auto& name : names) {
      const std::uint64_t len = read_u64(is);
      if (len > 4096) throw Error(ErrorKind::ParseError, "implausible label length");
      name.resize(len);
      is.read(name.data(), static_cast<std::streamsize>(len));
    }
    BowClassifier model(config, std::move(names));
    model.salt_ = salt;
    model.allocate();
    read_floats(is, model.w1_);
    read_floats(is, model.b1_);
    read_floats(is, model.w2_);
    read_floats(is, model.b2_);
    if (!is) throw Error(ErrorKind::ParseError, "truncated classifier model");
    return model;
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::IoError, "cannot write " + path);
    save(os);
  }
  static BowClassifier load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::IoError, "cannot read " + path);
    return load(is);
  }

  /// Hashed feature ids of a text (sorted, unique).
  std::vector<std::uint32_t> featurize(std::string_view text) const {
    std::vector<std::uint32_t> ids;
    const std::uint64_t mask = config_.feature_dim - 1;
    for (const auto& tok : detail::alnum_tokens(text)) {
      ids.push_back(static_cast<std::uint32_t>(detail::fnv1a(tok, salt_) & mask));
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

 private:
  static constexpr char kMagic[8] = {'E', 'S', 'C', 'B', 'O', 'W', '0', '1'};
  static constexpr double kInitScale = 0.1;

  BowClassifier(BowClassifierConfig config, std::vector<std::string> names)
      : config_(config), label_names_(std::move(names)), salt_(kFeatureSalt) {}

  void allocate() {
    w1_.assign(config_.feature_dim * config_.hidden_units, 0.0f);
    b1_.assign(config_.hidden_units, 0.0f);
    w2_.assign(config_.hidden_units * k(), 0.0f);
    b2_.assign(k(), 0.0f);
  }

  void initialize() {
    allocate();
    detail::Rng rng(detail::derive_seed(config_.seed, "init"));
    for (auto& w : w1_) w = static_cast<float>(rng.normal() * kInitScale);
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden_units));
    for (auto& w : w2_) w = static_cast<float>(rng.normal() * out_scale);
  }

  void forward_hidden(std::span<const std::uint32_t> features, std::span<float> hidden) const {
    const std::size_t h = config_.hidden_units;
    std::copy(b1_.begin(), b1_.end(), hidden.begin());
    for (std::uint32_t f : features) {
      const float* row = w1_.data() + static_cast<std::size_t>(f) * h;
      for (std::size_t j = 0; j < h; ++j) hidden[j] += row[j];
    }
    for (auto& v : hidden) v = std::max(v, 0.0f);
  }

  void apply_dropout(std::span<const float> hidden, std::span<float> out, detail::Rng& rng) const {
    const double keep = 1.0 - config_.dropout_ratio;
    if (config_.dropout_ratio == 0.0) {
      std::copy(hidden.begin(), hidden.end(), out.begin());
      return;
    }
    const auto scale = static_cast<float>(1.0 / keep);
    for (std::size_t j = 0; j < hidden.size(); ++j) {
      out[j] = rng.uniform() < keep ? hidden[j] * scale : 0.0f;
    }
  }

  std::vector<double> logits(std::span<const float> hidden) const {
    const std::size_t kk = k();
    std::vector<double> z(b2_.begin(), b2_.end());
    for (std::size_t j = 0; j < hidden.size(); ++j) {
      const double hj = hidden[j];
      if (hj == 0.0) continue;
      const float* row = w2_.data() + j * kk;
      for (std::size_t c = 0; c < kk; ++c) z[c] += hj * row[c];
    }
    return z;
  }

  std::vector<double> softmax_output(std::span<const float> hidden) const {
    auto z = logits(hidden);
    const double shift = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
      v = std::exp(v - shift);
      sum += v;
    }
    for (auto& v : z) v /= sum;
    return z;
  }

  void fit(std::span<const LabeledText> corpus) {
    const std::size_t h = config_.hidden_units;
    const std::size_t kk = k();
    std::vector<std::vector<std::uint32_t>> features;
    features.reserve(corpus.size());
    for (const auto& ex : corpus) features.push_back(featurize(ex.text));

    detail::Rng order_rng(detail::derive_seed(config_.seed, "order"));
    detail::Rng dropout_rng(detail::derive_seed(config_.seed, "dropout"));
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t batch = config_.batch_size;
    std::vector<float> pre(batch * h);
    std::vector<float> act(batch * h);
    std::vector<float> grad_hidden(batch * h);
    std::vector<double> grad_w2(h * kk);
    std::vector<double> grad_b2(kk);
    std::vector<double> grad_b1(h);

    for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
      order_rng.shuffle(std::span(order));
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t count = std::min(batch, order.size() - start);
        std::fill(grad_w2.begin(), grad_w2.end(), 0.0);
        std::fill(grad_b2.begin(), grad_b2.end(), 0.0);
        std::fill(grad_b1.begin(), grad_b1.end(), 0.0);

        for (std::size_t e = 0; e < count; ++e) {
          const std::size_t idx = order[start + e];
          std::span<float> hp(pre.data() + e * h, h);
          std::span<float> ha(act.data() + e * h, h);
          forward_hidden(features[idx], hp);
          apply_dropout(hp, ha, dropout_rng);
          auto probs = softmax_output(ha);
          probs[corpus[idx].label] -= 1.0;  // dL/dlogits

          std::span<float> gh(grad_hidden.data() + e * h, h);
          for (std::size_t j = 0; j < h; ++j) {
            double g = 0.0;
            const float* row = w2_.data() + j * kk;
            for (std::size_t c = 0; c < kk; ++c) {
              g += row[c] * probs[c];
              grad_w2[j * kk + c] += ha[j] * probs[c];
            }
            // Through the dropout mask and ReLU: zero wherever the unit was off.
            gh[j] = ha[j] > 0.0f ? static_cast<float>(g * (ha[j] / hp[j])) : 0.0f;
            grad_b1[j] += gh[j];
          }
          for (std::size_t c = 0; c < kk; ++c) grad_b2[c] += probs[c];
        }

        const double step = config_.learning_rate / static_cast<double>(count);
        for (std::size_t i = 0; i < w2_.size(); ++i) w2_[i] -= static_cast<float>(step * grad_w2[i]);
        for (std::size_t c = 0; c < kk; ++c) b2_[c] -= static_cast<float>(step * grad_b2[c]);
        for (std::size_t j = 0; j < h; ++j) b1_[j] -= static_cast<float>(step * grad_b1[j]);
        for (std::size_t e = 0; e < count; ++e) {
          const std::size_t idx = order[start + e];
          const float* gh = grad_hidden.data() + e * h;
          for (std::uint32_t f : features[idx]) {
            float* row = w1_.data() + static_cast<std::size_t>(f) * h;
            for (std::size_t j = 0; j < h; ++j) row[j] -= static_cast<float>(step * gh[j]);
          }
        }
      }
    }
  }

  static void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  static void write_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
  static void write_floats(std::ostream& os, std::span<const float> v) {
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  }
  static std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw Error(ErrorKind::ParseError, "truncated classifier model");
    return v;
  }
  static double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw Error(ErrorKind::ParseError, "truncated classifier model");
    return v;
  }
  static void read_floats(std::istream& is, std::span<float> v) {
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  }

  BowClassifierConfig config_;
  std::vector<std::string> label_names_;
  std::uint64_t salt_;
  std::vector<float> w1_;  // feature_dim x hidden
  std::vector<float> b1_;
  std::vector<float> w2_;  // hidden x k
  std::vector<float> b2_;
};

/// Replays exported model outputs, keyed by sample id.
class ReplayBackend final : public ClassifierBackend {
 public:
  ReplayBackend(PredictionSet set, std::vector<McSampleSet> mc = {}) : set_(std::move(set)) {
    for (std::size_t i = 0; i < set_.rows.size(); ++i) by_id_[set_.rows[i].sample_id] = i;
    for (auto& m : mc) mc_[m.sample_id] = std::move(m);
    if (set_.label_names.empty()) {
      for (std::size_t c = 0; c < set_.k; ++c) set_.label_names.push_back(std::to_string(c));
    }
  }

  std::size_t k() const override { return set_.k; }
  const std::vector<std::string>& label_names() const override { return set_.label_names; }

  std::vector<double> predict(std::string_view id) const override {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) throw Error(ErrorKind::MisalignedData, "no stored prediction for '" + std::string(id) + "'");
    return set_.rows[it->second].probs;
  }

  /// Returns the first `s` stored passes; the seed is irrelevant for replay.
  McSampleSet mc_predict(std::string_view id, std::size_t s, std::uint64_t /*seed*/) const override {
    const auto it = mc_.find(std::string(id));
    if (it == mc_.end()) throw Error(ErrorKind::MissingStd, "no stored MC samples for '" + std::string(id) + "'");
    McSampleSet out = it->second;
    if (s < out.samples.size()) out.samples.resize(s);
    return out;
  }

 private:
  PredictionSet set_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, McSampleSet> mc_;
};

}  // namespace escalada

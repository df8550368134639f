// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file exports.hpp
 * @brief CSV/JSON writers for comparison reports and plot data.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "escalada/bench/experiments.hpp"
#include "escalada/detail/csv.hpp"
#include "escalada/escalation.hpp"
#include "escalada/prediction.hpp"

namespace escalada::bench {

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

/// Equal-width bins on [lo, hi]; values outside are clamped into the end bins.
inline Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw Error(ErrorKind::BadConfig, "histogram needs bins > 0 and hi > lo");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  for (double v : values) {
    const double t = (v - lo) / (hi - lo) * static_cast<double>(bins);
    const auto b = static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, static_cast<double>(bins - 1)));
    ++h.counts[b];
  }
  return h;
}

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

/// Long format: series,bin_lo,bin_hi,count. All series share one bin range.
inline void write_histogram_csv(std::ostream& os, std::span<const NamedSeries> series, std::size_t bins) {
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& s : series) {
    for (double v : s.values) {
      if (first) lo = hi = v, first = false;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  os << "series,bin_lo,bin_hi,count\n";
  for (const auto& s : series) {
    const auto h = make_histogram(s.values, bins, lo, hi);
    for (std::size_t b = 0; b < bins; ++b) {
      os << escalada::detail::csv_escape(s.name) << ',' << lo + b * h.bin_width() << ','
         << lo + (b + 1) * h.bin_width() << ',' << h.counts[b] << '\n';
    }
  }
}

inline void write_delta_sweep_csv(std::ostream& os, std::span<const DeltaSweepRow> rows) {
  os.precision(17);
  os << "delta,b,escalated_count,objective\n";
  for (const auto& r : rows) os << r.delta << ',' << r.b << ',' << r.escalated_count << ',' << r.objective << '\n';
}

inline void write_report_csv(std::ostream& os, const ComparisonReport& report) {
  os.precision(17);
  os << "method,irrelevant_count,b,c,d,threshold_objective,relevant_correct,relevant_wrong,relevant_escalated,"
        "irrelevant_answered,irrelevant_escalated,mean_accuracy,escalation_accuracy,precision,recall,f1\n";
  for (const auto& r : report.rows) {
    const auto& c = r.counts;
    os << to_string(r.method) << ',' << r.irrelevant_count << ',' << r.policy.b << ',' << r.policy.c << ','
       << r.policy.d << ',' << r.threshold_objective << ',' << c.relevant_correct << ',' << c.relevant_wrong << ','
       << c.relevant_escalated << ',' << c.irrelevant_answered << ',' << c.irrelevant_escalated << ','
       << r.mean_accuracy() << ','
       << r.escalation_accuracy() << ',' << r.precision() << ',' << r.recall() << ',' << r.f1() << '\n';
  }
}

inline nlohmann::ordered_json report_to_json(const ComparisonReport& report) {
  nlohmann::ordered_json j;
  j["k"] = report.k;
  j["tier"] = report.tier;
  j["delta"] = report.delta;
  j["pools"] = {{"train_relevant", report.train_relevant},
                {"threshold_relevant", report.threshold_relevant},
                {"threshold_irrelevant", report.threshold_irrelevant_pool},
                {"test_relevant", report.test_relevant},
                {"test_irrelevant", report.test_irrelevant}};
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    const auto& c = r.counts;
    j["rows"].push_back({{"method", std::string(to_string(r.method))},
                         {"irrelevant_count", r.irrelevant_count},
                         {"policy", policy_to_json(r.policy)},
                         {"threshold_objective", r.threshold_objective},
                         {"counts",
                          {{"relevant_correct", c.relevant_correct},
                           {"relevant_wrong", c.relevant_wrong},
                           {"relevant_escalated", c.relevant_escalated},
                           {"irrelevant_answered", c.irrelevant_answered},
                           {"irrelevant_escalated", c.irrelevant_escalated}}},
                         {"mean_accuracy", r.mean_accuracy()},
                         {"escalation_accuracy", r.escalation_accuracy()},
                         {"precision", r.precision()},
                         {"recall", r.recall()},
                         {"f1", r.f1()}});
  }
  j["notes"] = report.notes;
  return j;
}

inline void write_ablation_csv(std::ostream& os, std::span<const SpellAblationRow> rows) {
  os.precision(17);
  os << "setting,oov_count,beam,evaluated,correct,accuracy\n";
  for (const auto& r : rows) {
    os << r.setting << ',' << r.oov_count << ',' << r.beam << ',' << r.evaluated << ',' << r.correct << ','
       << r.accuracy() << '\n';
  }
}

/// Everything the plotting step needs, computed from one split.
struct PlotData {
  std::vector<NamedSeries> entropy;            // per pool
  std::vector<NamedSeries> dropout_std;        // per pool and dropout ratio
  GridSearchResult grid;                       // dropout thresholds
  std::vector<DeltaSweepRow> delta_sweep;      // entropy threshold per delta
};

struct PlotConfig {
  ExperimentConfig experiment;
  std::vector<double> dropout_ratios{0.1, 0.3, 0.5};
  std::size_t grid_steps = 51;
  std::vector<double> deltas{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
};

inline PlotData compute_plot_data(const LabeledDataset& ds, const SplitPlan& plan, const PlotConfig& config) {
  using escalada::detail::derive_seed;
  const auto& ex = config.experiment;
  const auto classes = ds.class_indices(ex.tier);
  const auto names = ds.label_space(ex.tier);
  const auto train_rel = plan.relevant_with(Role::Train);
  const auto thr_rel = plan.relevant_with(Role::ThresholdLearn);
  const auto thr_irr = plan.irrelevant_with(Role::ThresholdLearn);
  const Pool rel_pool = make_pool(ds, classes, thr_rel, {});
  const Pool irr_pool = make_pool(ds, classes, {}, thr_irr);
  const Pool both = make_pool(ds, classes, thr_rel, thr_irr);
  const auto loss = build_loss_labels(both.labels, names.size(), ex.delta);

  PlotData out;
  auto cfg = ex.classifier;
  cfg.seed = derive_seed(ex.seed, "classifier");
  const auto model = train_classifier(ds, classes, names, train_rel, {}, cfg);
  {
    const auto rel = score_pool(model, rel_pool, 0, 0, ex.jobs);
    const auto irr = score_pool(model, irr_pool, 0, 0, ex.jobs);
    NamedSeries a{"relevant", {}}, b{"irrelevant", {}};
    for (const auto& s : rel) a.values.push_back(s.entropy);
    for (const auto& s : irr) b.values.push_back(s.entropy);
    out.entropy = {a, b};
    std::vector<UncertaintyStats> all = rel;
    all.insert(all.end(), irr.begin(), irr.end());
    out.delta_sweep = delta_sweep(all, both.labels, names.size(), config.deltas);
  }
  {
    const auto mc = score_pool(model, both, ex.mc_samples, derive_seed(ex.seed, "mc/grid"), ex.jobs);
    out.grid = grid_search_oracle(mc, loss, config.grid_steps);
  }
  for (double ratio : config.dropout_ratios) {
    auto rc = ex.classifier;
    rc.dropout_ratio = ratio;
    rc.seed = derive_seed(ex.seed, "classifier");
    const auto m = ratio == ex.classifier.dropout_ratio ? model : train_classifier(ds, classes, names, train_rel, {}, rc);
    const auto rel = score_pool(m, rel_pool, ex.mc_samples, derive_seed(ex.seed, "mc/threshold-rel"), ex.jobs);
    const auto irr = score_pool(m, irr_pool, ex.mc_samples, derive_seed(ex.seed, "mc/threshold-irr"), ex.jobs);
    char tag[32];
    std::snprintf(tag, sizeof tag, "%g", ratio);
    NamedSeries a{std::string("relevant@") + tag, {}}, b{std::string("irrelevant@") + tag, {}};
    for (const auto& s : rel) a.values.push_back(s.std_devs[argmax(s.mean_probs)]);
    for (const auto& s : irr) b.values.push_back(s.std_devs[argmax(s.mean_probs)]);
    out.dropout_std.push_back(std::move(a));
    out.dropout_std.push_back(std::move(b));
  }
  return out;
}

}  // namespace escalada::bench

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "escalada/escalada.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace escalada;
using namespace escalada::bench;

namespace {

struct RunConfig {
  std::string config_path;
  unsigned long long seed = 0;
  std::size_t jobs = 1;
  std::string out = "escalada_out";

  std::string dataset;
  std::string format = "auto";
  int tier = 3;
  std::size_t desk_per_intent = DeskCorpusConfig{}.per_intent;
  std::size_t desk_out_of_scope = DeskCorpusConfig{}.out_of_scope;
  unsigned long long desk_seed = DeskCorpusConfig{}.seed;

  BowClassifierConfig classifier = ExperimentConfig{}.classifier;
  std::size_t mc_samples = 100;

  std::string mode = "entropy";
  double delta = kDefaultDelta;
  std::size_t grid_steps = 100;
  std::vector<double> deltas = PlotConfig{}.deltas;
  std::vector<std::size_t> irrelevant_counts;
  std::vector<double> dropout_ratios = PlotConfig{}.dropout_ratios;
  std::size_t bins = 30;

  std::string model;
  std::string predictions;
  std::string labels;
  std::string label_names;
  std::string policy;
  std::string pool = "test";
  std::string input;

  std::string sentence;
  std::string request;
  std::size_t beamsize = CompletionConfig{}.b;
  std::size_t max_edit_distance = CompletionConfig{}.max_edit_distance;
  std::size_t beam_cutoff = CompletionConfig{}.v2_beam_cutoff;
  std::string custom_vocab;
  std::string ignore_rule;
  std::string lm_corpus;
  std::string lm_dump;
  std::string vocab;
  std::size_t ngram_order = NgramConfig{}.order;
  double ngram_smoothing = NgramConfig{}.smoothing;

  std::string text;
  std::size_t count = 1;
  std::vector<std::size_t> oov_counts{1, 2, 3};
  std::vector<std::size_t> beam_sizes{1, 10, 100, 1000, 4000};

  std::string events;
  double window_hours = 24.0;
  double oov_threshold = 0.01;
};

using Target = std::variant<std::string*, double*, std::size_t*, unsigned long long*, int*, std::vector<std::size_t>*,
                            std::vector<double>*>;

struct Setting {
  std::string key;
  Target target;
  CLI::Option* option;
};

class Registry {
 public:
  explicit Registry(CLI::App& app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& key, T& value, const std::string& help) {
    CLI::Option* opt = app_.add_option("--" + key, value, help)->capture_default_str();
    if constexpr (std::is_same_v<T, std::vector<std::size_t>> || std::is_same_v<T, std::vector<double>>) {
      opt->delimiter(',');
    }
    settings_.push_back({key, Target(&value), opt});
    return opt;
  }

  /// Fills every setting not given on the command line from a flat JSON object.
  void apply_config(const json& cfg) {
    if (!cfg.is_object()) throw Error(ErrorKind::BadConfig, "config file must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "subcommand") continue;
      auto it = std::find_if(settings_.begin(), settings_.end(), [&](const Setting& s) { return s.key == key; });
      if (it == settings_.end()) throw Error(ErrorKind::BadConfig, "unknown config key '" + key + "'");
      if (it->option->count() > 0) continue;
      try {
        std::visit([&](auto* p) { assign(*p, value); }, it->target);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::BadConfig, "config key '" + key + "': " + e.what());
      }
    }
  }

  bool given(const std::string& key) const {
    for (const auto& s : settings_) {
      if (s.key == key) return s.option->count() > 0;
    }
    return false;
  }

  ordered_json to_json() const {
    ordered_json j;
    for (const auto& s : settings_) {
      if (s.key == "config") continue;
      std::visit([&](auto* p) { j[s.key] = *p; }, s.target);
    }
    return j;
  }

 private:
  template <class T>
  static void assign(T& target, const json& value) {
    if constexpr (std::is_same_v<T, std::vector<std::size_t>> || std::is_same_v<T, std::vector<double>>) {
      if (value.is_string()) {
        target.clear();
        for (const auto& part : escalada::detail::split_on(value.get<std::string>(), ',')) {
          if constexpr (std::is_same_v<T, std::vector<double>>) {
            target.push_back(std::stod(part));
          } else {
            target.push_back(static_cast<std::size_t>(std::stoull(part)));
          }
        }
        return;
      }
    }
    target = value.get<T>();
  }

  CLI::App& app_;
  std::vector<Setting> settings_;
};

// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(line);
  }
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::BadConfig, what);
}

LabeledDataset load_data(const RunConfig& rc) {
  if (rc.dataset.empty()) return make_desk_corpus({rc.desk_per_intent, rc.desk_out_of_scope, rc.desk_seed});
  DatasetFormat f = DatasetFormat::Auto;
  if (rc.format == "csv") f = DatasetFormat::Csv;
  else if (rc.format == "json") f = DatasetFormat::Json;
  else require(rc.format == "auto", "--format must be auto, csv or json");
  return load_dataset(rc.dataset, f);
}

ExperimentConfig experiment_config(const RunConfig& rc) {
  ExperimentConfig ex;
  ex.classifier = rc.classifier;
  ex.mc_samples = rc.mc_samples;
  ex.delta = rc.delta;
  ex.irrelevant_counts = rc.irrelevant_counts;
  ex.tier = rc.tier;
  ex.seed = rc.seed;
  ex.jobs = rc.jobs;
  return ex;
}

PolicyMode parse_mode(const std::string& m) {
  if (m == "entropy") return PolicyMode::Entropy;
  if (m == "dropout") return PolicyMode::Dropout;
  if (m == "dummy") return PolicyMode::DummyClass;
  throw Error(ErrorKind::BadConfig, "--mode must be entropy, dropout or dummy");
}

std::vector<std::string> label_names_from(const RunConfig& rc) {
  return rc.label_names.empty() ? std::vector<std::string>{} : read_lines(rc.label_names);
}

/// Pool rows for --pool: train | threshold | test | held-out | all.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> pool_rows(const SplitPlan& plan, const std::string& pool,
                                                                        const LabeledDataset& ds) {
  auto cat = [](std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    return a;
  };
  if (pool == "train") return {plan.relevant_with(Role::Train), {}};
  if (pool == "threshold") return {plan.relevant_with(Role::ThresholdLearn), plan.irrelevant_with(Role::ThresholdLearn)};
  if (pool == "test") return {plan.relevant_with(Role::Test), plan.irrelevant_with(Role::Test)};
  if (pool == "held-out") {
    return {cat(plan.relevant_with(Role::ThresholdLearn), plan.relevant_with(Role::Test)),
            cat(plan.irrelevant_with(Role::ThresholdLearn), plan.irrelevant_with(Role::Test))};
  }
  if (pool == "all") {
    std::vector<std::size_t> r(ds.relevant.size()), i(ds.irrelevant.size());
    for (std::size_t x = 0; x < r.size(); ++x) r[x] = x;
    for (std::size_t x = 0; x < i.size(); ++x) i[x] = x;
    return {r, i};
  }
  throw Error(ErrorKind::BadConfig, "--pool must be train, threshold, test, held-out or all");
}

/// Labels CSV with columns id,label overrides the labels stored in a dump.
void apply_label_file(PredictionDump& dump, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  escalada::detail::CsvReader reader(in);
  std::vector<std::string> header, row;
  if (!reader.next(header)) throw Error(ErrorKind::ParseError, "labels file is empty");
  const auto id_col = std::find(header.begin(), header.end(), "id") - header.begin();
  const auto label_col = std::find(header.begin(), header.end(), "label") - header.begin();
  if (static_cast<std::size_t>(id_col) == header.size() || static_cast<std::size_t>(label_col) == header.size()) {
    throw Error(ErrorKind::ParseError, "labels file needs 'id' and 'label' columns");
  }
  std::unordered_map<std::string, ClassLabel> by_id;
  while (reader.next(row)) {
    if (row.size() != header.size()) throw Error(ErrorKind::ParseError, reader.where() + ": wrong field count");
    by_id[row[id_col]] = parse_class_label(row[label_col], dump.set.label_names, dump.set.k);
  }
  for (auto& r : dump.set.rows) {
    const auto it = by_id.find(r.sample_id);
    if (it == by_id.end()) throw Error(ErrorKind::MisalignedData, "no label for id '" + r.sample_id + "'");
    r.true_label = it->second;
  }
}

struct LoadedPredictions {
  PredictionDump dump;
  std::vector<UncertaintyStats> stats;
  std::vector<ClassLabel> labels;
};

LoadedPredictions load_predictions(const RunConfig& rc, bool need_std) {
  require(!rc.predictions.empty(), "--predictions is required");
  const auto names = label_names_from(rc);
  LoadedPredictions lp{load_prediction_dump(rc.predictions, names), {}, {}};
  if (!rc.labels.empty()) apply_label_file(lp.dump, rc.labels);
  const bool has_mc = lp.dump.mc.size() == lp.dump.set.rows.size();
  if (need_std && !has_mc) {
    throw Error(ErrorKind::MissingStd, "dropout thresholds need a dump with \"samples\" on every row");
  }
  for (std::size_t i = 0; i < lp.dump.set.rows.size(); ++i) {
    lp.stats.push_back(has_mc ? aggregate_mc(lp.dump.mc[i]) : stats_from_probs(lp.dump.set.rows[i]));
    lp.labels.push_back(lp.dump.set.rows[i].true_label);
  }
  return lp;
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

int cmd_train(const RunConfig& rc, const fs::path& out) {
  const auto ds = load_data(rc);
  const auto plan = make_splits(ds, rc.seed, rc.tier);
  const auto classes = ds.class_indices(rc.tier);
  auto names = ds.label_space(rc.tier);
  auto cfg = rc.classifier;
  std::vector<std::size_t> dummy;
  if (parse_mode(rc.mode) == PolicyMode::DummyClass) {
    const auto pool = plan.irrelevant_with(Role::ThresholdLearn);
    const std::size_t n = rc.irrelevant_counts.empty() ? pool.size() : rc.irrelevant_counts.front();
    std::vector<std::size_t> positions(pool.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    for (std::size_t p : subsample(positions, n, escalada::detail::derive_seed(rc.seed, "irrelevant/" + std::to_string(n)))) {
      dummy.push_back(pool[p]);
    }
    cfg.seed = escalada::detail::derive_seed(rc.seed, "dummy/" + std::to_string(n));
  } else {
    cfg.seed = escalada::detail::derive_seed(rc.seed, "classifier");
  }
  const auto model = train_classifier(ds, classes, names, plan.relevant_with(Role::Train), dummy, cfg);
  model.save((out / "model.bin").string());
  auto ln = open_out(out / "label_names.txt");
  for (const auto& n : model.label_names()) ln << n << '\n';
  std::cout << "trained " << model.k() << "-class model on " << plan.relevant_with(Role::Train).size()
            << " relevant";
  if (!dummy.empty()) std::cout << " + " << dummy.size() << " irrelevant";
  std::cout << " questions -> " << (out / "model.bin").string() << '\n';
  return 0;
}

int cmd_predict(const RunConfig& rc, const fs::path& out) {
  require(!rc.model.empty(), "--model is required");
  const auto model = BowClassifier::load(rc.model);
  const auto ds = load_data(rc);
  const auto plan = make_splits(ds, rc.seed, rc.tier);
  const auto names = ds.label_space(rc.tier);
  std::vector<std::size_t> classes = ds.class_indices(rc.tier);
  auto [rel, irr] = pool_rows(plan, rc.pool, ds);
  const Pool pool = make_pool(ds, classes, rel, irr);

  // Model classes must start with the dataset classes (a dummy model adds one).
  require(model.k() >= names.size() &&
              std::equal(names.begin(), names.end(), model.label_names().begin()),
          "model classes do not match the dataset label space at this tier");

  PredictionSet set;
  set.k = model.k();
  set.label_names = model.label_names();
  set.rows.resize(pool.size());
  std::vector<McSampleSet> mc(rc.mc_samples > 0 ? pool.size() : 0);
  const auto mc_seed = escalada::detail::derive_seed(rc.seed, "mc/predict");
  parallel_for(pool.size(), rc.jobs, [&](std::size_t i) {
    set.rows[i] = {pool.ids[i], pool.labels[i], model.predict(pool.texts[i])};
    if (rc.mc_samples > 0) {
      mc[i] = model.mc_predict(pool.texts[i], rc.mc_samples, escalada::detail::derive_seed(mc_seed, i));
      mc[i].sample_id = pool.ids[i];
    }
  });
  write_prediction_dump((out / "predictions.jsonl").string(), set, mc);
  auto labels = open_out(out / "labels.csv");
  labels << "id,label\n";
  for (const auto& r : set.rows) {
    labels << escalada::detail::csv_escape(r.sample_id) << ','
           << escalada::detail::csv_escape(format_class_label(r.true_label, set.label_names)) << '\n';
  }
  auto ln = open_out(out / "label_names.txt");
  for (const auto& n : set.label_names) ln << n << '\n';
  std::cout << "wrote " << set.rows.size() << " predictions (" << rc.pool << " pool"
            << (rc.mc_samples ? ", " + std::to_string(rc.mc_samples) + " MC samples" : std::string()) << ") -> "
            << (out / "predictions.jsonl").string() << '\n';
  return 0;
}

int cmd_optimize_threshold(const RunConfig& rc, const fs::path& out) {
  const PolicyMode mode = parse_mode(rc.mode);
  require(mode != PolicyMode::DummyClass, "the dummy class has no thresholds to optimize");
  const auto lp = load_predictions(rc, mode == PolicyMode::Dropout);
  const std::size_t k = lp.dump.set.k;
  std::vector<std::string> ids;
  for (const auto& s : lp.stats) ids.push_back(s.sample_id);
  const auto loss = build_loss_labels(lp.labels, k, rc.delta, ids);
  ordered_json j;
  if (mode == PolicyMode::Entropy) {
    const auto sol = solve_entropy_threshold(lp.stats, loss);
    j = policy_to_json(ThresholdPolicy::entropy(sol.b, k, rc.delta));
    j["objective"] = sol.objective;
    j["escalated_count"] = sol.escalated_count;
  } else {
    const auto sol = solve_dropout_thresholds(lp.stats, loss);
    j = policy_to_json(ThresholdPolicy::dropout(sol.c, sol.d, k, rc.delta));
    j["objective"] = sol.objective;
  }
  j["questions"] = lp.stats.size();
  write_json(out / "policy.json", j);
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_grid_search(const RunConfig& rc, const fs::path& out) {
  const auto lp = load_predictions(rc, true);
  const auto loss = build_loss_labels(lp.labels, lp.dump.set.k, rc.delta);
  const auto grid = grid_search_oracle(lp.stats, loss, rc.grid_steps);
  auto csv = open_out(out / "grid.csv");
  write_grid_csv(csv, grid);
  ordered_json best;
  best["c"] = grid.best.c;
  best["d"] = grid.best.d;
  best["objective"] = grid.best.objective;
  best["steps"] = grid.steps;
  write_json(out / "grid_best.json", best);
  std::cout << best.dump() << '\n';
  return 0;
}

int cmd_decide(const RunConfig& rc, const fs::path& out) {
  require(!rc.policy.empty(), "--policy is required");
  const auto policy = policy_from_json(json::parse(read_file(rc.policy)));
  std::vector<UncertaintyStats> stats;
  std::vector<std::string> names;
  std::vector<std::string> texts;
  if (!rc.predictions.empty()) {
    const auto lp = load_predictions(rc, policy.mode == PolicyMode::Dropout);
    stats = lp.stats;
    names = lp.dump.set.label_names;
  } else {
    require(!rc.model.empty() && !rc.input.empty(), "decide needs --predictions, or --model with --input");
    const auto model = BowClassifier::load(rc.model);
    names = model.label_names();
    texts = read_lines(rc.input);
    stats.resize(texts.size());
    const bool mc = policy.mode == PolicyMode::Dropout;
    require(!mc || rc.mc_samples > 0, "a dropout policy needs --mc-samples > 0");
    const auto mc_seed = escalada::detail::derive_seed(rc.seed, "mc/decide");
    parallel_for(texts.size(), rc.jobs, [&](std::size_t i) {
      if (mc) {
        stats[i] = aggregate_mc(model.mc_predict(texts[i], rc.mc_samples, escalada::detail::derive_seed(mc_seed, i)));
      } else {
        stats[i] = stats_from_probs({"", kIrrelevant, model.predict(texts[i])});
      }
      stats[i].sample_id = "line-" + std::to_string(i + 1);
    });
  }
  const auto decisions = decide_all(policy, stats);
  auto os = open_out(out / "decisions.jsonl");
  std::size_t escalated = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    ordered_json j;
    j["id"] = d.sample_id;
    if (!texts.empty()) j["text"] = texts[i];
    j["escalated"] = d.escalated();
    j["answer"] = d.escalated() ? json(nullptr) : json(format_class_label(d.answer, names));
    j["entropy"] = stats[i].entropy;
    os << j.dump() << '\n';
    escalated += d.escalated() ? 1 : 0;
  }
  std::cout << escalated << " of " << decisions.size() << " questions escalated -> "
            << (out / "decisions.jsonl").string() << '\n';
  return 0;
}

std::unique_ptr<MaskedTokenScorer> make_scorer(const RunConfig& rc, const LabeledDataset* ds,
                                               const SplitPlan* plan) {
  if (!rc.lm_dump.empty()) return std::make_unique<FileScorer>(FileScorer::from_file(rc.lm_dump));
  std::vector<std::string> corpus;
  if (!rc.lm_corpus.empty()) {
    corpus = read_lines(rc.lm_corpus);
  } else {
    for (std::size_t i : plan->relevant_with(Role::Train)) corpus.push_back(ds->relevant[i].text);
  }
  return std::make_unique<NgramScorer>(corpus, NgramConfig{rc.ngram_order, rc.ngram_smoothing});
}

CompletionConfig completion_config(const RunConfig& rc) {
  CompletionConfig cc;
  cc.m = cc.b = rc.beamsize;
  cc.max_edit_distance = rc.max_edit_distance;
  cc.v2_beam_cutoff = rc.beam_cutoff;
  cc.validate();
  return cc;
}

int cmd_complete(const RunConfig& rc, const fs::path& out) {
  require(!rc.sentence.empty() || !rc.request.empty(), "complete needs --sentence or --request");
  std::optional<LabeledDataset> ds;
  std::optional<SplitPlan> plan;
  VocabularyConfig vocab;
  if (rc.lm_corpus.empty() && rc.lm_dump.empty()) {
    ds = load_data(rc);
    plan = make_splits(*ds, rc.seed, rc.tier);
    for (std::size_t i : plan->relevant_with(Role::Train)) {
      for (const auto& t : tokenize_sentence(ds->relevant[i].text)) vocab.training_vocab.insert(escalada::detail::to_lower(t));
    }
  }
  const auto scorer = make_scorer(rc, ds ? &*ds : nullptr, plan ? &*plan : nullptr);
  if (auto* ng = dynamic_cast<NgramScorer*>(scorer.get())) {
    for (const auto& w : ng->vocabulary()) vocab.embedding_vocab.insert(w);
  }
  if (!rc.vocab.empty()) {
    const auto words = read_lines(rc.vocab);
    for (const auto& w : VocabularyConfig::lowercase_set(words)) vocab.embedding_vocab.insert(w);
  }
  json request;
  if (!rc.request.empty()) {
    request = json::parse(rc.request == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {}) : read_file(rc.request));
  } else {
    request = {{"sentence", rc.sentence}, {"beamsize", rc.beamsize}};
  }
  if (!rc.custom_vocab.empty() && !request.contains("custom_vocab")) request["custom_vocab"] = rc.custom_vocab;
  if (!rc.ignore_rule.empty() && !request.contains("ignore_rule")) request["ignore_rule"] = rc.ignore_rule;
  const auto response = handle_completion_request(request, vocab, *scorer, completion_config(rc));
  write_json(out / "completion.json", response);
  std::cout << response.dump() << '\n';
  return 0;
}

int cmd_gen_misspell(const RunConfig& rc, const fs::path& out) {
  std::vector<std::string> texts;
  if (!rc.text.empty()) texts.push_back(rc.text);
  if (!rc.input.empty()) {
    const auto lines = read_lines(rc.input);
    texts.insert(texts.end(), lines.begin(), lines.end());
  }
  require(!texts.empty(), "gen-misspell needs --text or --input");
  auto os = open_out(out / "misspellings.jsonl");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto m = gen_misspellings(texts[i], rc.count, escalada::detail::derive_seed(rc.seed, i));
    ordered_json j{{"original", texts[i]}, {"misspelled", m.text}, {"altered_words", m.altered_words}};
    os << j.dump() << '\n';
    std::cout << m.text << '\n';
  }
  return 0;
}

int cmd_compare_methods(const RunConfig& rc, const fs::path& out) {
  const auto ds = load_data(rc);
  const auto plan = make_splits(ds, rc.seed, rc.tier);
  const auto report = run_method_comparison(ds, plan, experiment_config(rc));
  auto csv = open_out(out / "report.csv");
  write_report_csv(csv, report);
  write_json(out / "report.json", report_to_json(report));
  std::printf("%-8s %8s %10s %10s %10s %10s %10s\n", "method", "count", "accuracy", "esc.acc", "precision", "recall",
              "f1");
  for (const auto& r : report.rows) {
    std::printf("%-8s %8zu %10.4f %10.4f %10.4f %10.4f %10.4f\n", std::string(to_string(r.method)).c_str(),
                r.irrelevant_count, r.mean_accuracy(), r.escalation_accuracy(), r.precision(), r.recall(), r.f1());
  }
  return 0;
}

int cmd_spell_ablation(const RunConfig& rc, const fs::path& out) {
  const auto ds = load_data(rc);
  const auto plan = make_splits(ds, rc.seed, rc.tier);
  SpellAblationConfig cfg;
  cfg.experiment = experiment_config(rc);
  cfg.oov_counts = rc.oov_counts;
  cfg.completion = completion_config(rc);
  cfg.ngram = {rc.ngram_order, rc.ngram_smoothing};
  cfg.beam_sizes = rc.beam_sizes;
  std::optional<FileScorer> file;
  if (!rc.lm_dump.empty()) file.emplace(FileScorer::from_file(rc.lm_dump));
  const auto rows = run_spell_ablation(ds, plan, cfg, file ? &*file : nullptr);
  auto csv = open_out(out / "ablation.csv");
  write_ablation_csv(csv, rows);
  for (const auto& r : rows) {
    std::printf("%-12s oov=%zu beam=%-5zu %5zu/%-5zu %.4f\n", r.setting.c_str(), r.oov_count, r.beam, r.correct,
                r.evaluated, r.accuracy());
  }
  return 0;
}

int cmd_monitor_oov(const RunConfig& rc, const fs::path& out) {
  require(!rc.events.empty(), "--events is required");
  using namespace std::chrono;
  OovRateMonitor monitor(duration_cast<OovRateMonitor::Duration>(duration<double, std::ratio<3600>>(rc.window_hours)),
                         rc.oov_threshold);
  std::ifstream in(rc.events);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + rc.events + "'");
  escalada::detail::CsvReader reader(in);
  std::vector<std::string> header, row;
  if (!reader.next(header)) throw Error(ErrorKind::ParseError, "events file is empty");
  auto col = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto ts_col = col("timestamp_ms");
  const auto oov_col = col("oov");
  const auto words_col = col("words");
  const auto text_col = col("text");
  if (!ts_col || !((oov_col && words_col) || text_col)) {
    throw Error(ErrorKind::ParseError, "events need timestamp_ms and either oov,words or text columns");
  }
  std::optional<VocabularyMatcher> matcher;
  if (text_col) {
    VocabularyConfig vocab;
    if (!rc.vocab.empty()) {
      for (const auto& w : VocabularyConfig::lowercase_set(read_lines(rc.vocab))) vocab.embedding_vocab.insert(w);
    } else {
      const auto ds = load_data(rc);
      const auto plan = make_splits(ds, rc.seed, rc.tier);
      for (std::size_t i : plan.relevant_with(Role::Train)) {
        for (const auto& t : tokenize_sentence(ds.relevant[i].text)) vocab.training_vocab.insert(escalada::detail::to_lower(t));
      }
    }
    matcher.emplace(std::move(vocab));
  }
  auto os = open_out(out / "monitor.csv");
  os << "timestamp_ms,oov,words,window_rate,alarm\n";
  os.precision(17);
  while (reader.next(row)) {
    if (row.size() != header.size()) throw Error(ErrorKind::ParseError, reader.where() + ": wrong field count");
    std::uint64_t oov = 0, words = 0;
    long long ts = 0;
    try {
      ts = std::stoll(row[*ts_col]);
      if (text_col) {
        const auto tokens = tokenize_sentence(row[*text_col]);
        words = tokens.size();
        oov = detect_oov(tokens, *matcher).size();
      } else {
        oov = std::stoull(row[*oov_col]);
        words = std::stoull(row[*words_col]);
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::ParseError, reader.where() + ": bad number");
    }
    monitor.record(OovRateMonitor::Timestamp(OovRateMonitor::Duration(ts)), oov, words);
    const auto s = monitor.status();
    os << ts << ',' << oov << ',' << words << ',' << s.rate << ',' << (s.alarm ? 1 : 0) << '\n';
  }
  const auto s = monitor.status();
  ordered_json j{{"rate", s.rate},           {"alarm", s.alarm},   {"oov_count", s.oov_count},
                 {"word_count", s.word_count}, {"events", s.events}, {"threshold", rc.oov_threshold},
                 {"window_hours", rc.window_hours}};
  write_json(out / "monitor_status.json", j);
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_export_plots(const RunConfig& rc, const fs::path& out) {
  const auto ds = load_data(rc);
  const auto plan = make_splits(ds, rc.seed, rc.tier);
  PlotConfig cfg;
  cfg.experiment = experiment_config(rc);
  cfg.dropout_ratios = rc.dropout_ratios;
  cfg.grid_steps = rc.grid_steps;
  cfg.deltas = rc.deltas;
  const auto data = compute_plot_data(ds, plan, cfg);
  {
    auto os = open_out(out / "entropy_hist.csv");
    write_histogram_csv(os, data.entropy, rc.bins);
  }
  {
    auto os = open_out(out / "std_hist.csv");
    write_histogram_csv(os, data.dropout_std, rc.bins);
  }
  {
    auto os = open_out(out / "f1_grid.csv");
    write_grid_csv(os, data.grid);
  }
  {
    auto os = open_out(out / "delta_sweep.csv");
    write_delta_sweep_csv(os, data.delta_sweep);
  }
  std::cout << "wrote entropy_hist.csv, std_hist.csv, f1_grid.csv, delta_sweep.csv to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"escalada: uncertainty-gated intent classification with learned escalation thresholds"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  RunConfig rc;
  Registry reg(app);

  reg.add("config", rc.config_path, "JSON file of flag values (flags on the command line take precedence)");
  reg.add("seed", rc.seed, "Root seed; every random stream is derived from it");
  reg.add("jobs", rc.jobs, "Worker threads for prediction and corrections")->check(CLI::PositiveNumber);
  reg.add("out", rc.out, "Output directory (ESCALADA_OUT overrides the config file and default)");

  reg.add("dataset", rc.dataset, "Dataset file (CSV or JSON); the built-in desk corpus when omitted");
  reg.add("format", rc.format, "Dataset format: auto, csv or json");
  reg.add("tier", rc.tier, "Label tier used as the class space (1, 2 or 3)")->check(CLI::Range(1, 3));
  reg.add("desk-per-intent", rc.desk_per_intent, "Desk corpus: questions per intent");
  reg.add("desk-out-of-scope", rc.desk_out_of_scope, "Desk corpus: out-of-scope questions");
  reg.add("desk-seed", rc.desk_seed, "Desk corpus: generator seed");

  reg.add("feature-dim", rc.classifier.feature_dim, "Classifier: hashed feature dimension (power of two)");
  reg.add("hidden-units", rc.classifier.hidden_units, "Classifier: hidden layer width");
  reg.add("dropout-ratio", rc.classifier.dropout_ratio, "Classifier: dropout ratio on the hidden layer");
  reg.add("epochs", rc.classifier.epochs, "Classifier: training epochs");
  reg.add("learning-rate", rc.classifier.learning_rate, "Classifier: SGD learning rate");
  reg.add("batch-size", rc.classifier.batch_size, "Classifier: mini-batch size");
  reg.add("mc-samples", rc.mc_samples, "Monte Carlo dropout passes per question (0 disables)");

  reg.add("mode", rc.mode, "Escalation mode: entropy, dropout or dummy");
  reg.add("delta", rc.delta, "Escalation-column target value in the loss");
  reg.add("grid-steps", rc.grid_steps, "Grid points per axis for the dropout grid search");
  reg.add("deltas", rc.deltas, "Comma-separated delta values for the delta sweep");
  reg.add("irrelevant-counts", rc.irrelevant_counts, "Comma-separated irrelevant question counts for threshold learning");
  reg.add("dropout-ratios", rc.dropout_ratios, "Comma-separated dropout ratios for std histograms");
  reg.add("bins", rc.bins, "Histogram bins");

  reg.add("model", rc.model, "Saved classifier (from train)");
  reg.add("predictions", rc.predictions, "Prediction dump (JSONL)");
  reg.add("labels", rc.labels, "Labels CSV with columns id,label (overrides dump labels)");
  reg.add("label-names", rc.label_names, "File with one class name per line, in class-index order");
  reg.add("policy", rc.policy, "Policy JSON (from optimize-threshold)");
  reg.add("pool", rc.pool, "Split pool to predict: train, threshold, test, held-out or all");
  reg.add("input", rc.input, "Text file with one question per line");

  reg.add("sentence", rc.sentence, "Sentence to complete");
  reg.add("request", rc.request, "Completion request JSON file ('-' for stdin)");
  reg.add("beamsize", rc.beamsize, "Candidates per slot and beam width");
  reg.add("max-edit-distance", rc.max_edit_distance, "Largest edit distance a replacement may have");
  reg.add("beam-cutoff", rc.beam_cutoff, "Largest beam size that still uses joint search");
  reg.add("custom-vocab", rc.custom_vocab, "Extra in-vocabulary words, '|'-separated");
  reg.add("ignore-rule", rc.ignore_rule, "Regex of tokens never treated as misspelled");
  reg.add("lm-corpus", rc.lm_corpus, "Text file (one sentence per line) for the n-gram scorer");
  reg.add("lm-dump", rc.lm_dump, "LM dump (JSONL) for the file-backed scorer");
  reg.add("vocab", rc.vocab, "Vocabulary file, one word per line");
  reg.add("ngram-order", rc.ngram_order, "N-gram order");
  reg.add("ngram-smoothing", rc.ngram_smoothing, "N-gram add-k smoothing");

  reg.add("text", rc.text, "Text to misspell");
  reg.add("count", rc.count, "Words to misspell per text");
  reg.add("oov-counts", rc.oov_counts, "Comma-separated misspelled-word counts for the ablation");
  reg.add("beam-sizes", rc.beam_sizes, "Comma-separated beam sizes for the ablation sweep");

  reg.add("events", rc.events, "Events CSV: timestamp_ms plus oov,words or text");
  reg.add("window-hours", rc.window_hours, "OOV monitor window in hours");
  reg.add("oov-threshold", rc.oov_threshold, "OOV rate above which the alarm is raised");

  using Handler = int (*)(const RunConfig&, const fs::path&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"train", "Train the bag-of-words classifier on the training split", cmd_train},
      {"predict", "Write a prediction dump for a split pool", cmd_predict},
      {"optimize-threshold", "Learn an entropy or dropout escalation policy from a dump", cmd_optimize_threshold},
      {"grid-search", "Grid search over dropout thresholds (F1/objective grid)", cmd_grid_search},
      {"decide", "Apply a policy to a dump or to raw questions", cmd_decide},
      {"complete", "Correct misspellings in a sentence", cmd_complete},
      {"gen-misspell", "Generate synthetic misspellings", cmd_gen_misspell},
      {"compare-methods", "Entropy vs dropout vs dummy-class comparison report", cmd_compare_methods},
      {"spell-ablation", "Intent accuracy under misspellings and corrections", cmd_spell_ablation},
      {"monitor-oov", "Replay events through the OOV rate monitor", cmd_monitor_oov},
      {"export-plots", "Export histogram, grid and delta-sweep CSVs", cmd_export_plots},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) subs.push_back(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  std::string subcommand;
  Handler handler = nullptr;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) {
      subcommand = std::get<0>(commands[i]);
      handler = std::get<2>(commands[i]);
    }
  }

  try {
    if (!rc.config_path.empty()) {
      json cfg;
      try {
        cfg = json::parse(read_file(rc.config_path));
      } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, rc.config_path + ": " + e.what());
      }
      reg.apply_config(cfg);
    }
    if (!reg.given("out")) {
      if (const char* env = std::getenv("ESCALADA_OUT"); env && *env) rc.out = env;
    }
    rc.classifier.validate();

    ordered_json resolved;
    resolved["subcommand"] = subcommand;
    const auto settings = reg.to_json();
    for (const auto& [k, v] : settings.items()) resolved[k] = v;
    const fs::path out(rc.out);
    fs::create_directories(out);
    write_json(out / "run_config.json", resolved);
    std::cerr << resolved.dump() << '\n';

    return handler(rc, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error [ParseError]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}

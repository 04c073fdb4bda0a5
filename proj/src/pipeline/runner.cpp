#include "depsev/pipeline/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "depsev/audio/acoustic_vector.hpp"
#include "depsev/behavior.hpp"
#include "depsev/error.hpp"
#include "depsev/face.hpp"
#include "depsev/feature_store.hpp"
#include "depsev/folds.hpp"
#include "depsev/io.hpp"
#include "depsev/models/model_io.hpp"
#include "depsev/pca.hpp"
#include "depsev/pipeline/corpus.hpp"
#include "depsev/random.hpp"
#include "depsev/text.hpp"

namespace depsev::pipeline {
namespace fs = std::filesystem;
using models::StoredModel;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void warn(const std::string& message) { std::clog << "warning: " << message << '\n'; }

class Stopwatch {
 public:
  Stopwatch(fs::path log, std::string label)
      : log_(std::move(log)), label_(std::move(label)), start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    std::error_code ec;
    fs::create_directories(log_.parent_path(), ec);
    std::ofstream out(log_, std::ios::app);
    if (out) out << label_ << ' ' << elapsed.count() << "s\n";
  }

 private:
  fs::path log_;
  std::string label_;
  std::chrono::steady_clock::time_point start_;
};

fs::path features_dir(const ResolvedConfig& c) { return c.raw.output / "features"; }
fs::path store_path(const ResolvedConfig& c) {
  return features_dir(c) / (feature_store_name(c.modality) + ".csv");
}
fs::path windows_path(const ResolvedConfig& c, const std::string& split) {
  return features_dir(c) / ("visual_" + split + ".windows");
}
fs::path model_path(const ResolvedConfig& c) { return c.raw.output / "models" / (run_tag(c) + ".model"); }
fs::path baseline_path(const ResolvedConfig& c) {
  return c.raw.output / "models" / (run_tag(c) + "_baseline.model");
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::string csv_safe(std::string s) {
  for (auto& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

// ---- extraction ------------------------------------------------------------

struct Extracted {
  FeatureTable table;
  std::vector<std::pair<std::string, std::string>> skipped;
};

template <typename RowFn>
void extract_rows(const Corpus& corpus, Extracted& out, RowFn&& row_of) {
  for (const auto* split : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const auto& e : *split) {
      try {
        const auto [names, values] = row_of(e.id);
        if (out.table.names.empty()) out.table.names = names;
        out.table.append(e.id, values.transpose());
      } catch (const Error& err) {
        warn("session " + e.id + " skipped: " + err.what());
        out.skipped.emplace_back(e.id, err.what());
      }
    }
  }
}

using NamedRow = std::pair<std::vector<std::string>, Eigen::VectorXd>;

Extracted extract_acoustic(const ResolvedConfig& c, const Corpus& corpus) {
  Extracted out;
  extract_rows(corpus, out, [&](const std::string& id) -> NamedRow {
    const auto files = session_files(corpus.root, id);
    auto turns = load_transcript(files.transcript);
    auto audio = read_wav(files.audio);
    const auto session = make_session(id, std::move(audio), std::move(turns), {}, std::nullopt);
    if (c.modality.group == audio::AcousticGroup::M) {
      const auto g = audio::session_acoustic_groups(session);
      auto merged = audio::merge_groups(g.p, g.s, g.vq);
      return {std::move(merged.names), std::move(merged.values)};
    }
    auto v = audio::session_acoustic_vector(session, c.modality.group);
    return {std::move(v.names), std::move(v.values)};
  });
  return out;
}

Extracted extract_behavioral(const ResolvedConfig& c, const Corpus& corpus) {
  const auto lexicon = c.raw.lexicon.empty() ? behavior::Lexicon{} : behavior::load_lexicon(c.raw.lexicon);
  const auto& names = behavior::behavior_feature_names();
  const std::vector<std::string> name_list(names.begin(), names.end());
  Extracted out;
  extract_rows(corpus, out, [&](const std::string& id) -> NamedRow {
    const auto turns = load_transcript(session_files(corpus.root, id).transcript);
    const auto v = behavior::behavior_vector(turns, lexicon);
    return {name_list, v.values};
  });
  return out;
}

Extracted extract_text(const ResolvedConfig& c, const Corpus& corpus) {
  std::map<std::string, text::Document> docs;
  Extracted out;
  std::vector<text::Document> training;
  for (const auto* split : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const auto& e : *split) {
      try {
        auto doc = text::build_document(load_transcript(session_files(corpus.root, e.id).transcript));
        if (split == &corpus.train) training.push_back(doc);
        docs.emplace(e.id, std::move(doc));
      } catch (const Error& err) {
        warn("session " + e.id + " skipped: " + err.what());
        out.skipped.emplace_back(e.id, err.what());
      }
    }
  }
  std::vector<std::string> names;
  std::function<Eigen::VectorXd(const text::Document&)> encode;
  text::TextModel model;
  text::EmbeddingTable table;
  if (c.modality.text == TextMode::Embedding) {
    table = text::load_embeddings(c.raw.embeddings);
    for (Eigen::Index k = 0; k < table.dimension(); ++k) names.push_back("we" + std::to_string(k));
    encode = [&](const text::Document& d) { return text::embed_average(d, table); };
  } else {
    if (training.empty()) throw EmptyInputError("no training transcripts to build a vocabulary");
    model = text::fit_text_model(training);
    text::save_text_model(features_dir(c) / "text_model.txt", model);
    for (std::size_t k = 0; k < model.vocabulary.size(); ++k) names.push_back("w" + std::to_string(k));
    const auto mode = c.modality.text == TextMode::Bool ? text::Weighting::Bool : text::Weighting::TfIdf;
    encode = [&, mode](const text::Document& d) {
      const std::array<text::Document, 1> one = {d};
      return Eigen::VectorXd(text::vectorize(one, model, mode).row(0).transpose());
    };
  }
  out.table.names = names;
  out.table.values.resize(0, static_cast<Eigen::Index>(names.size()));
  for (const auto* split : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const auto& e : *split) {
      const auto it = docs.find(e.id);
      if (it != docs.end()) out.table.append(e.id, encode(it->second).transpose());
    }
  }
  return out;
}

ExtractSummary extract_visual(const ResolvedConfig& c, const Corpus& corpus) {
  std::vector<std::pair<std::string, std::string>> skipped;
  std::map<std::string, LandmarkSequence> loaded;
  auto load = [&](const std::string& id) -> const LandmarkSequence* {
    try {
      return &loaded.emplace(id, load_landmarks(session_files(corpus.root, id).landmarks)).first->second;
    } catch (const Error& err) {
      warn("session " + id + " skipped: " + err.what());
      skipped.emplace_back(id, err.what());
      return nullptr;
    }
  };
  PcaAccumulator acc;
  for (const auto& e : corpus.train) {
    if (const auto* seq = load(e.id)) acc.add(face::sampled_descriptors(*seq));
    loaded.clear();
  }
  const auto pca = acc.fit(c.raw.pca_variance);
  save_pca(features_dir(c) / "visual_pca.txt", pca);

  ExtractSummary summary;
  summary.store = "visual";
  summary.dimension = pca.dim();
  std::vector<std::pair<std::string, std::string>> second_pass;
  std::vector<std::pair<std::string, const std::vector<SplitEntry>*>> splits = {{"train", &corpus.train},
                                                                                {"dev", &corpus.dev}};
  if (corpus.has_test) splits.emplace_back("test", &corpus.test);
  for (const auto& [split_name, entries] : splits) {
    face::WindowBatch batch;
    batch.config = c.raw.window;
    batch.dimension = pca.dim();
    for (const auto& e : *entries) {
      std::optional<double> label;
      if (split_name == "train" && e.score) label = *e.score;
      LandmarkSequence seq;
      try {
        seq = load_landmarks(session_files(corpus.root, e.id).landmarks);
      } catch (const Error& err) {
        if (split_name != "train") {
          warn("session " + e.id + " skipped: " + err.what());
          skipped.emplace_back(e.id, err.what());
        }
        continue;
      }
      auto w = face::window_sequence(e.id, seq, pca, label, c.raw.window);
      if (w.windows.empty()) warn("session " + e.id + " has no complete window");
      for (auto& win : w.windows) batch.windows.push_back(std::move(win));
      ++summary.sessions;
    }
    face::write_window_batch(windows_path(c, split_name), batch);
  }
  std::string skipped_csv = "session_id,reason\n";
  for (const auto& [id, reason] : skipped) skipped_csv += id + ',' + csv_safe(reason) + '\n';
  write_text_file(features_dir(c) / "visual.skipped.csv", skipped_csv);
  summary.skipped = skipped.size();
  return summary;
}

// ---- training --------------------------------------------------------------

struct TrainingRows {
  FeatureTable table;
  Eigen::VectorXd y;
};

TrainingRows training_rows(const Corpus& corpus, const FeatureTable& table) {
  std::vector<std::string> ids;
  std::vector<double> y;
  for (const auto& e : corpus.train) {
    if (!e.score) throw ArgumentError("training session " + e.id + " is unlabeled");
    if (table.find(e.id) < 0) {
      warn("training session " + e.id + " has no features; left out");
      continue;
    }
    ids.push_back(e.id);
    y.push_back(*e.score);
  }
  if (ids.size() < 2) throw EmptyInputError("fewer than two usable training sessions");
  TrainingRows out;
  out.table = table.select_rows(ids);
  out.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return out;
}

selection::FitPredict regressor_for(const ResolvedConfig& c) {
  if (c.model == ModelKind::RepTree) {
    return [cfg = c.raw.reptree, seed = c.seed](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                  const Eigen::MatrixXd& t) -> Eigen::VectorXd {
      return models::predict_rows(models::reptree_train(x, y, cfg, seed), t);
    };
  }
  return [cfg = c.raw.svr](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& t) -> Eigen::VectorXd {
    return models::predict_rows(models::svr_train(x, y, cfg), t);
  };
}

struct TabularFit {
  StoredModel model;
  StoredModel baseline;
  std::vector<std::string> selected;
  std::optional<selection::ReliefTuning> tuning;
};

TabularFit fit_tabular(const ResolvedConfig& c, const FeatureTable& rows, const Eigen::VectorXd& y) {
  TabularFit fit;
  const FeatureTable* used = &rows;
  FeatureTable chosen;
  if (c.modality.feature_selection) {
    fit.tuning = selection::tune_relief(rows.values, y, c.raw.relief, regressor_for(c), c.seed);
    const auto classes = selection::binarize(as_span(y));
    const auto weights = selection::relief_weights(rows.values, classes, fit.tuning->k);
    chosen = rows.select_columns(selection::select_top(weights.weights, fit.tuning->threshold,
                                                       c.raw.relief.n_max));
    used = &chosen;
    fit.selected = chosen.names;
    fit.model.metadata.emplace_back("relief_threshold", format_double(fit.tuning->threshold));
    fit.model.metadata.emplace_back("relief_k", std::to_string(fit.tuning->k));
  }
  fit.model.columns = used->names;
  fit.model.metadata.emplace_back("modality", to_string(c.modality));
  fit.model.metadata.emplace_back("training_sessions", std::to_string(rows.rows()));
  if (used->cols() == 0) {
    warn("no feature survived selection; the model predicts the training mean");
    fit.model.model = models::mean_train(y, 0);
  } else if (c.model == ModelKind::Svr) {
    fit.model.model = models::svr_train(used->values, y, c.raw.svr);
  } else {
    fit.model.model = models::reptree_train(used->values, y, c.raw.reptree, c.seed);
  }
  fit.baseline.columns = used->names;
  fit.baseline.model = models::mean_train(y, used->cols());
  fit.baseline.metadata.emplace_back("training_sessions", std::to_string(rows.rows()));
  return fit;
}

Eigen::MatrixXd columns_for(const FeatureTable& table, const std::vector<std::string>& columns) {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t k = 0; k < table.names.size(); ++k) index.emplace(table.names[k], static_cast<Eigen::Index>(k));
  std::vector<Eigen::Index> picked;
  for (const auto& name : columns) {
    const auto it = index.find(name);
    if (it == index.end()) throw ArgumentError("feature store has no column '" + name + "'");
    picked.push_back(it->second);
  }
  return table.select_columns(picked).values;
}

face::WindowBatch subset(const face::WindowBatch& all, const std::vector<std::string>& sessions) {
  std::unordered_map<std::string, bool> keep;
  for (const auto& s : sessions) keep.emplace(s, true);
  face::WindowBatch out;
  out.config = all.config;
  out.dimension = all.dimension;
  for (const auto& w : all.windows) {
    if (keep.count(w.session_id)) out.windows.push_back(w);
  }
  return out;
}

models::LstmModel fit_visual(const ResolvedConfig& c, const face::WindowBatch& windows) {
  if (windows.windows.empty()) throw EmptyInputError("no training windows");
  std::vector<std::string> sessions;
  for (const auto& w : windows.windows) {
    if (sessions.empty() || sessions.back() != w.session_id) sessions.push_back(w.session_id);
  }
  Rng rng(c.seed);
  rng.shuffle(std::span<std::string>(sessions));
  const auto n = sessions.size();
  std::size_t held = 0;
  if (n >= 2 && c.raw.lstm_validation_fraction > 0.0) {
    held = static_cast<std::size_t>(std::llround(c.raw.lstm_validation_fraction * static_cast<double>(n)));
    held = std::clamp<std::size_t>(held, 1, n - 1);
  }
  const std::vector<std::string> validation(sessions.begin(), sessions.begin() + static_cast<std::ptrdiff_t>(held));
  const std::vector<std::string> train(sessions.begin() + static_cast<std::ptrdiff_t>(held), sessions.end());
  return models::lstm_train(subset(windows, train), subset(windows, validation), c.raw.lstm);
}

std::map<std::string, std::vector<double>> window_predictions(const models::LstmModel& model,
                                                              const face::WindowBatch& batch) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& w : batch.windows) out[w.session_id].push_back(models::predict(model, w.samples));
  return out;
}

// ---- reports ---------------------------------------------------------------

MetricReport safe_metrics(const std::vector<double>& y, const std::vector<double>& p) {
  MetricReport r;
  if (y.size() >= 2) {
    const auto e = compute_errors(y, p);
    r.rmse = e.rmse;
    r.mae = e.mae;
    try {
      r.evs = explained_variance(y, p);
    } catch (const NumericError&) {
      r.evs = kNaN;
    }
  } else {
    r.rmse = r.mae = std::abs(y.at(0) - p.at(0));
    r.evs = kNaN;
  }
  return r;
}

void write_predictions(const fs::path& path, const std::vector<PredictionRow>& rows) {
  std::string out = "session_id,fold,label,prediction,baseline,fallback\n";
  for (const auto& r : rows) {
    out += r.session_id + ',' + std::to_string(r.fold) + ',' +
           (r.label ? format_double(*r.label) : std::string()) + ',' + format_double(r.prediction) +
           ',' + format_double(r.baseline) + ',' + (r.fallback ? "1" : "0") + '\n';
  }
  write_text_file(path, out);
}

std::string metrics_csv_row(const std::string& scope, const SplitMetrics& m) {
  return scope + ',' + std::to_string(m.count) + ',' + format_double(m.model.rmse) + ',' +
         format_double(m.model.mae) + ',' + format_double(m.model.evs) + ',' +
         format_double(m.baseline.rmse) + ',' + format_double(m.baseline.mae) + ',' +
         format_double(m.baseline.evs) + '\n';
}

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_report(const ResolvedConfig& c, const RunReport& r) {
  const auto base = c.raw.output / "reports" / (r.tag + "_" + r.split);
  std::string csv = "scope,count,model_rmse,model_mae,model_evs,baseline_rmse,baseline_mae,baseline_evs\n";
  csv += metrics_csv_row("all", r.metrics);
  for (const auto& [fold, m] : r.folds) csv += metrics_csv_row("fold_" + std::to_string(fold), m);
  write_text_file(base.string() + ".csv", csv);

  std::ostringstream t;
  t << "run " << r.tag << " on split " << r.split << '\n';
  t << "modality " << to_string(c.modality) << ", model " << to_string(c.model) << '\n';
  t << "feature dimension " << r.dimension << '\n';
  if (!r.relief_choice.empty()) t << "relief " << r.relief_choice << '\n';
  if (!r.selected.empty()) {
    t << "selected features (" << r.selected.size() << "):";
    for (const auto& s : r.selected) t << ' ' << s;
    t << '\n';
  }
  for (const auto& w : r.warnings) t << "warning: " << w << '\n';
  t << "sessions scored " << r.metrics.count << ", baseline fallbacks " << r.fallbacks << "\n\n";
  t << "scope        RMSE       MAE        EVS\n";
  auto line = [&](const std::string& label, const MetricReport& m) {
    t << label << std::string(label.size() < 12 ? 12 - label.size() : 1, ' ') << ' '
      << fixed(m.rmse) << "     " << fixed(m.mae) << "     " << fixed(m.evs) << '\n';
  };
  line("model", r.metrics.model);
  line("baseline", r.metrics.baseline);
  for (const auto& [fold, m] : r.folds) line("fold " + std::to_string(fold), m.model);
  t << "\nconfiguration\n" << r.config_echo;
  write_text_file(base.string() + ".txt", t.str());
}

RunReport base_report(const ResolvedConfig& c, const std::string& split) {
  RunReport r;
  r.tag = run_tag(c);
  r.split = split;
  r.config_echo = format_config(c.raw);
  r.warnings = c.warnings;
  return r;
}

void describe_model(RunReport& r, const StoredModel& m) {
  if (const auto* th = m.meta("relief_threshold")) {
    r.relief_choice = "threshold=" + *th + ",k=" + *m.meta("relief_k");
    r.selected = m.columns;
  }
}

const std::vector<SplitEntry>& labeled_train(const Corpus& corpus) {
  for (const auto& e : corpus.train) {
    if (!e.score) throw ArgumentError("training session " + e.id + " is unlabeled");
  }
  return corpus.train;
}

}  // namespace

std::string run_tag(const ResolvedConfig& c) {
  return feature_store_name(c.modality) + (c.modality.feature_selection ? "_FS_" : "_") +
         to_string(c.model);
}

ExtractSummary run_extract(const ResolvedConfig& c) {
  Stopwatch timer(c.raw.output / "timings.log", "extract " + feature_store_name(c.modality));
  const auto corpus = scan_corpus(c.raw.corpus);
  if (c.modality.kind == ModalityKind::Visual) return extract_visual(c, corpus);

  Extracted out;
  switch (c.modality.kind) {
    case ModalityKind::Acoustic:
      out = extract_acoustic(c, corpus);
      break;
    case ModalityKind::Behavioral:
      out = extract_behavioral(c, corpus);
      break;
    case ModalityKind::Text:
      out = extract_text(c, corpus);
      break;
    case ModalityKind::Visual:
      break;
  }
  if (out.table.rows() == 0) throw EmptyInputError("no session produced features");
  write_feature_csv(store_path(c), out.table);
  std::string skipped = "session_id,reason\n";
  for (const auto& [id, reason] : out.skipped) skipped += id + ',' + csv_safe(reason) + '\n';
  write_text_file(features_dir(c) / (feature_store_name(c.modality) + ".skipped.csv"), skipped);
  return {feature_store_name(c.modality), static_cast<std::size_t>(out.table.rows()), out.skipped.size(),
          out.table.cols()};
}

TrainSummary run_train(const ResolvedConfig& c) {
  Stopwatch timer(c.raw.output / "timings.log", "train " + run_tag(c));
  const auto corpus = scan_corpus(c.raw.corpus);
  TrainSummary summary;
  summary.tag = run_tag(c);
  StoredModel model;
  StoredModel baseline;
  if (c.modality.tabular()) {
    const auto rows = training_rows(corpus, read_feature_csv(store_path(c)));
    auto fit = fit_tabular(c, rows.table, rows.y);
    summary.sessions = static_cast<std::size_t>(rows.y.size());
    summary.dimension = static_cast<Eigen::Index>(fit.model.columns.size());
    summary.selected = fit.selected;
    summary.tuning = fit.tuning;
    model = std::move(fit.model);
    baseline = std::move(fit.baseline);
  } else {
    const auto& train = labeled_train(corpus);
    const auto windows = face::read_window_batch(windows_path(c, "train"));
    auto lstm = fit_visual(c, windows);
    double mean = 0.0;
    for (const auto& e : train) mean += *e.score;
    mean /= static_cast<double>(train.size());
    for (Eigen::Index k = 0; k < windows.dimension; ++k) model.columns.push_back("c" + std::to_string(k));
    model.metadata.emplace_back("modality", "visual");
    model.metadata.emplace_back("training_windows", std::to_string(windows.windows.size()));
    model.model = std::move(lstm);
    baseline.columns = model.columns;
    baseline.model = models::MeanModel{mean, windows.dimension};
    summary.sessions = train.size();
    summary.dimension = windows.dimension;
  }
  models::save_model(model_path(c), model);
  models::save_model(baseline_path(c), baseline);
  summary.model_path = model_path(c);

  std::ostringstream t;
  t << "trained " << summary.tag << " on " << summary.sessions << " sessions\n";
  t << "model kind " << models::model_kind(model.model) << ", input dimension " << summary.dimension << '\n';
  for (const auto& w : c.warnings) t << "warning: " << w << '\n';
  if (summary.tuning) {
    t << "relief threshold=" << format_double(summary.tuning->threshold) << ",k=" << summary.tuning->k << '\n';
    t << "grid (threshold, k, mae, mean selected):\n";
    for (const auto& g : summary.tuning->grid) {
      t << "  " << format_double(g.threshold) << ' ' << g.k << ' '
        << (g.skipped ? "skipped: " + g.reason : fixed(g.mae) + ' ' + fixed(g.mean_selected)) << '\n';
    }
    t << "selected features (" << summary.selected.size() << "):";
    for (const auto& s : summary.selected) t << ' ' << s;
    t << '\n';
  }
  if (const auto* lstm = std::get_if<models::LstmModel>(&model.model)) {
    t << "best epoch " << lstm->best_epoch << '\n';
    t << "epoch train_loss validation_loss\n";
    for (std::size_t e = 0; e < lstm->train_loss.size(); ++e) {
      t << e << ' ' << format_double(lstm->train_loss[e]) << ' '
        << (e < lstm->validation_loss.size() ? format_double(lstm->validation_loss[e]) : "-") << '\n';
    }
  }
  t << "\nconfiguration\n" << format_config(c.raw);
  write_text_file(c.raw.output / "reports" / (summary.tag + "_train.txt"), t.str());
  return summary;
}

SplitMetrics metrics_of(const std::vector<PredictionRow>& rows) {
  std::vector<double> y;
  std::vector<double> p;
  std::vector<double> b;
  for (const auto& r : rows) {
    if (!r.label) continue;
    y.push_back(*r.label);
    p.push_back(r.prediction);
    b.push_back(r.baseline);
  }
  if (y.empty()) throw EmptyInputError("no labeled session to score");
  return {y.size(), safe_metrics(y, p), safe_metrics(y, b)};
}

RunReport run_eval(const ResolvedConfig& c, const std::string& split) {
  Stopwatch timer(c.raw.output / "timings.log", "eval " + run_tag(c) + " " + split);
  const auto corpus = scan_corpus(c.raw.corpus);
  const auto& entries = corpus.split(split);
  if (entries.empty()) throw EmptyInputError("split '" + split + "' has no sessions");
  const auto stored = models::load_model(model_path(c));
  const auto baseline = models::load_model(baseline_path(c));
  const double fallback = std::get<models::MeanModel>(baseline.model).mean;

  RunReport report = base_report(c, split);
  report.dimension = static_cast<Eigen::Index>(stored.columns.size());
  describe_model(report, stored);
  std::vector<PredictionRow> rows;
  if (c.modality.tabular()) {
    const auto table = read_feature_csv(store_path(c));
    for (const auto& e : entries) {
      PredictionRow row{e.id, 0, e.score ? std::optional<double>(*e.score) : std::nullopt, fallback, fallback, true};
      const auto r = table.find(e.id);
      if (r >= 0) {
        const auto x = columns_for(table.select_rows({e.id}), stored.columns);
        row.prediction = models::predict_rows(stored.model, x)[0];
        row.fallback = false;
      }
      rows.push_back(row);
    }
  } else {
    const auto& lstm = std::get<models::LstmModel>(stored.model);
    const auto preds = window_predictions(lstm, face::read_window_batch(windows_path(c, split)));
    for (const auto& e : entries) {
      const auto it = preds.find(e.id);
      const auto score = face::aggregate_predictions(
          it == preds.end() ? std::span<const double>() : std::span<const double>(it->second), fallback);
      rows.push_back({e.id, 0, e.score ? std::optional<double>(*e.score) : std::nullopt, score.score,
                      fallback, score.used_fallback});
    }
  }
  for (const auto& r : rows) report.fallbacks += r.fallback ? 1 : 0;
  report.metrics = metrics_of(rows);
  write_predictions(c.raw.output / "predictions" / (report.tag + "_" + split + ".csv"), rows);
  write_report(c, report);
  return report;
}

CvScheme parse_cv_scheme(const std::string& text) {
  if (text == "kfold") return CvScheme::KFold;
  if (text == "loso") return CvScheme::Loso;
  throw ArgumentError("unknown cross-validation scheme '" + text + "' (kfold, loso)");
}

std::string to_string(CvScheme scheme) { return scheme == CvScheme::KFold ? "kfold" : "loso"; }

RunReport run_cv(const ResolvedConfig& c, CvScheme scheme) {
  Stopwatch timer(c.raw.output / "timings.log", "cv " + run_tag(c) + " " + to_string(scheme));
  const auto corpus = scan_corpus(c.raw.corpus);
  RunReport report = base_report(c, "cv_" + to_string(scheme));

  // Sessions in cross-validation order with their labels.
  std::vector<std::string> ids;
  Eigen::VectorXd y;
  FeatureTable table;
  face::WindowBatch windows;
  if (c.modality.tabular()) {
    auto rows = training_rows(corpus, read_feature_csv(store_path(c)));
    ids = rows.table.ids;
    y = rows.y;
    table = std::move(rows.table);
    report.dimension = table.cols();
  } else {
    const auto& train = labeled_train(corpus);
    for (const auto& e : train) ids.push_back(e.id);
    y.resize(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) y[static_cast<Eigen::Index>(i)] = *train[i].score;
    windows = face::read_window_batch(windows_path(c, "train"));
    report.dimension = windows.dimension;
  }
  const auto n = ids.size();
  const int folds = scheme == CvScheme::KFold ? c.raw.relief.folds : static_cast<int>(n);
  if (n < static_cast<std::size_t>(folds) || n < 2) {
    throw ArgumentError("cross-validation needs at least " + std::to_string(std::max(folds, 2)) +
                        " labeled sessions, found " + std::to_string(n));
  }
  std::vector<int> fold_of(n);
  if (scheme == CvScheme::KFold) {
    fold_of = stratified_folds(selection::binarize(as_span(y)), folds, c.seed);
  } else {
    for (std::size_t i = 0; i < n; ++i) fold_of[i] = static_cast<int>(i);
  }

  std::vector<PredictionRow> all;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::string> train_ids;
    std::vector<double> train_y;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f) {
        test.push_back(i);
      } else {
        train_ids.push_back(ids[i]);
        train_y.push_back(y[static_cast<Eigen::Index>(i)]);
      }
    }
    const Eigen::VectorXd ty = Eigen::Map<const Eigen::VectorXd>(train_y.data(), static_cast<Eigen::Index>(train_y.size()));
    const double fallback = ty.mean();
    std::vector<PredictionRow> fold_rows;
    if (c.modality.tabular()) {
      const auto fit = fit_tabular(c, table.select_rows(train_ids), ty);
      for (const auto i : test) {
        const auto x = columns_for(table.select_rows({ids[i]}), fit.model.columns);
        fold_rows.push_back({ids[i], f, y[static_cast<Eigen::Index>(i)],
                             models::predict_rows(fit.model.model, x)[0], fallback, false});
      }
    } else {
      const auto lstm = fit_visual(c, subset(windows, train_ids));
      std::vector<std::string> test_ids;
      for (const auto i : test) test_ids.push_back(ids[i]);
      const auto preds = window_predictions(lstm, subset(windows, test_ids));
      for (const auto i : test) {
        const auto it = preds.find(ids[i]);
        const auto score = face::aggregate_predictions(
            it == preds.end() ? std::span<const double>() : std::span<const double>(it->second), fallback);
        fold_rows.push_back({ids[i], f, y[static_cast<Eigen::Index>(i)], score.score, fallback,
                             score.used_fallback});
      }
    }
    report.folds.emplace_back(f, metrics_of(fold_rows));
    all.insert(all.end(), fold_rows.begin(), fold_rows.end());
  }
  for (const auto& r : all) report.fallbacks += r.fallback ? 1 : 0;
  report.metrics = metrics_of(all);
  write_predictions(c.raw.output / "predictions" / (report.tag + "_" + report.split + ".csv"), all);
  write_report(c, report);
  return report;
}

selection::ReliefTuning run_tune_relief(const ResolvedConfig& c) {
  if (!c.modality.tabular()) throw ArgumentError("tune-relief needs a tabular modality");
  Stopwatch timer(c.raw.output / "timings.log", "tune-relief " + feature_store_name(c.modality));
  const auto corpus = scan_corpus(c.raw.corpus);
  const auto rows = training_rows(corpus, read_feature_csv(store_path(c)));
  auto tuning = selection::tune_relief(rows.table.values, rows.y, c.raw.relief, regressor_for(c), c.seed);
  std::string csv = "threshold,k,mae,mean_selected,skipped,reason\n";
  for (const auto& g : tuning.grid) {
    csv += format_double(g.threshold) + ',' + std::to_string(g.k) + ',' +
           (g.skipped ? std::string() : format_double(g.mae)) + ',' + format_double(g.mean_selected) +
           ',' + (g.skipped ? "1" : "0") + ',' + csv_safe(g.reason) + '\n';
  }
  csv += "chosen," + format_double(tuning.threshold) + ',' + std::to_string(tuning.k) + ",,,\n";
  write_text_file(c.raw.output / "reports" / (feature_store_name(c.modality) + "_relief_grid.csv"), csv);
  return tuning;
}

std::vector<PredictionRow> read_predictions(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  if (line != "session_id,fold,label,prediction,baseline,fallback") {
    throw ParseError(path.string(), 1, "unexpected predictions header");
  }
  std::vector<PredictionRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() == 5) f.emplace_back();
    if (f.size() != 6) throw ParseError(path.string(), line_no, "expected 6 columns");
    try {
      PredictionRow r;
      r.session_id = f[0];
      r.fold = std::stoi(f[1]);
      if (!f[2].empty()) r.label = std::stod(f[2]);
      r.prediction = std::stod(f[3]);
      r.baseline = std::stod(f[4]);
      r.fallback = f[5] == "1";
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(path.string(), line_no, "malformed number");
    }
  }
  return rows;
}

}  // namespace depsev::pipeline

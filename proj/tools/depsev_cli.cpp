#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "depsev/error.hpp"
#include "depsev/io.hpp"
#include "depsev/pipeline/config.hpp"
#include "depsev/pipeline/runner.hpp"
#include "depsev/pipeline/synth.hpp"

namespace {

using depsev::pipeline::PipelineConfig;
using nlohmann::json;

struct RunOptions {
  std::string config_file;
  std::string corpus;
  std::string output;
  std::string modality;
  std::string model;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("-c,--config", o.config_file, "configuration file");
  cmd->add_option("--corpus", o.corpus, "corpus root");
  cmd->add_option("-o,--out", o.output, "output directory");
  cmd->add_option("-m,--modality", o.modality,
                  "acoustic:S|P|VQ|M|M+FS, behavioral, text:BOOL|TFIDF|WE, visual");
  cmd->add_option("--model", o.model, "svr, reptree, lstm or auto");
  cmd->add_option("-s,--seed", o.seed, "random seed");
  cmd->add_option("--set", o.sets, "override as section.key=value")->take_all();
}

PipelineConfig build_config(const RunOptions& o) {
  PipelineConfig c = o.config_file.empty() ? PipelineConfig{} : depsev::pipeline::load_config(o.config_file);
  if (!o.corpus.empty()) c.corpus = o.corpus;
  if (!o.output.empty()) c.output = o.output;
  if (!o.modality.empty()) c.modality = o.modality;
  if (!o.model.empty()) c.model = o.model;
  if (o.seed) c.seed = *o.seed;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw depsev::ArgumentError("--set expects section.key=value, got '" + s + "'");
    depsev::pipeline::set_option(c, s.substr(0, eq), s.substr(eq + 1));
  }
  return c;
}

depsev::pipeline::ResolvedConfig resolve_for_run(const RunOptions& o) {
  const auto config = build_config(o);
  if (config.corpus.empty()) throw depsev::ArgumentError("run.corpus is required");
  if (config.output.empty()) throw depsev::ArgumentError("run.output is required");
  auto resolved = depsev::pipeline::resolve(config);
  for (const auto& w : resolved.warnings) std::clog << "warning: " << w << '\n';
  return resolved;
}

json metrics_json(const depsev::pipeline::SplitMetrics& m) {
  auto one = [](const depsev::MetricReport& r) {
    return json{{"rmse", r.rmse}, {"mae", r.mae}, {"evs", std::isnan(r.evs) ? json(nullptr) : json(r.evs)}};
  };
  return json{{"count", m.count}, {"model", one(m.model)}, {"baseline", one(m.baseline)}};
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depression severity estimation from interview recordings"};
  app.require_subcommand(1);

  RunOptions extract_opts;
  RunOptions train_opts;
  RunOptions eval_opts;
  RunOptions cv_opts;
  RunOptions tune_opts;
  RunOptions show_opts;
  std::string eval_split = "dev";
  std::string cv_scheme = "kfold";

  auto* extract = app.add_subcommand("extract", "compute per-session features for one modality");
  add_run_options(extract, extract_opts);
  auto* train = app.add_subcommand("train", "train the configured model on the training split");
  add_run_options(train, train_opts);
  auto* eval = app.add_subcommand("eval", "score a split with the trained model and the mean baseline");
  add_run_options(eval, eval_opts);
  eval->add_option("--split", eval_split, "train, dev, or test (needs test_split.csv)");
  auto* cv = app.add_subcommand("cv", "cross-validate on the training split");
  add_run_options(cv, cv_opts);
  cv->add_option("--scheme", cv_scheme, "kfold or loso");
  auto* tune = app.add_subcommand("tune-relief", "grid-search the Relief threshold and neighbour count");
  add_run_options(tune, tune_opts);
  auto* show = app.add_subcommand("show-config", "print every configuration key with its value");
  add_run_options(show, show_opts);

  depsev::pipeline::SynthSpec spec;
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("-o,--out", synth_out, "corpus root")->required();
  synth->add_option("-s,--seed", synth_seed, "random seed")->required();
  synth->add_option("--train", spec.train_sessions, "training sessions");
  synth->add_option("--dev", spec.dev_sessions, "development sessions");
  synth->add_option("--train-depressed", spec.train_depressed, "depressed training sessions");
  synth->add_option("--dev-depressed", spec.dev_depressed, "depressed development sessions");
  synth->add_option("--sample-rate", spec.sample_rate, "audio sample rate");
  synth->add_option("--exchanges", spec.exchanges, "question/answer exchanges per interview");
  synth->add_option("--response-effect", spec.response_effect, "response latency added at maximum severity (s)");
  synth->add_option("--landmark-seconds", spec.landmark_seconds, "landmark track length");
  synth->add_option("--landmark-fps", spec.landmark_fps, "landmark frame rate");
  synth->add_option("--failure-rate", spec.tracking_failure_rate, "tracking failure onset probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*show) {
      std::cout << depsev::pipeline::format_config(build_config(show_opts));
    } else if (*synth) {
      depsev::pipeline::gen_synthetic(spec, synth_seed, synth_out);
      std::cout << json{{"corpus", synth_out},
                        {"train", spec.train_sessions},
                        {"dev", spec.dev_sessions}}.dump()
                << '\n';
    } else if (*extract) {
      const auto s = depsev::pipeline::run_extract(resolve_for_run(extract_opts));
      std::cout << json{{"store", s.store}, {"sessions", s.sessions}, {"skipped", s.skipped},
                        {"dimension", s.dimension}}.dump()
                << '\n';
    } else if (*train) {
      const auto s = depsev::pipeline::run_train(resolve_for_run(train_opts));
      json out{{"tag", s.tag}, {"sessions", s.sessions}, {"dimension", s.dimension},
               {"model", s.model_path.string()}};
      if (s.tuning) {
        out["relief"] = {{"threshold", s.tuning->threshold}, {"k", s.tuning->k}};
        out["selected"] = s.selected;
      }
      std::cout << out.dump() << '\n';
    } else if (*eval) {
      const auto r = depsev::pipeline::run_eval(resolve_for_run(eval_opts), eval_split);
      std::cout << json{{"tag", r.tag}, {"split", r.split}, {"fallbacks", r.fallbacks},
                        {"metrics", metrics_json(r.metrics)}}.dump()
                << '\n';
    } else if (*cv) {
      const auto r = depsev::pipeline::run_cv(resolve_for_run(cv_opts),
                                              depsev::pipeline::parse_cv_scheme(cv_scheme));
      json folds = json::array();
      for (const auto& [fold, m] : r.folds) folds.push_back({{"fold", fold}, {"metrics", metrics_json(m)}});
      std::cout << json{{"tag", r.tag}, {"split", r.split}, {"metrics", metrics_json(r.metrics)},
                        {"folds", folds}}.dump()
                << '\n';
    } else if (*tune) {
      const auto t = depsev::pipeline::run_tune_relief(resolve_for_run(tune_opts));
      std::cout << json{{"threshold", t.threshold}, {"k", t.k}}.dump() << '\n';
    }
  } catch (const depsev::Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}

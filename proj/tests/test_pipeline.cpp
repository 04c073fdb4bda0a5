#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "depsev/error.hpp"
#include "depsev/pipeline/config.hpp"
#include "depsev/pipeline/corpus.hpp"
#include "depsev/pipeline/runner.hpp"
#include "depsev/pipeline/synth.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace depsev;
using namespace depsev::pipeline;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

SynthSpec small_spec() {
  SynthSpec spec;
  spec.train_sessions = 24;
  spec.train_depressed = 8;
  spec.dev_sessions = 8;
  spec.dev_depressed = 3;
  spec.landmark_seconds = 20.0;
  return spec;
}

ResolvedConfig behavioral(const fs::path& corpus, const fs::path& out, std::uint64_t seed = 3) {
  PipelineConfig raw;
  raw.corpus = corpus;
  raw.output = out;
  raw.seed = seed;
  return resolve(raw);
}

void full_run(const ResolvedConfig& config) {
  run_extract(config);
  run_train(config);
  run_eval(config, "dev");
}

// Every output file except the wall-clock log, keyed by relative path.
std::map<std::string, std::string> outputs(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().filename() == "timings.log") continue;
    files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

}  // namespace

TEST_CASE("config text round trip") {
  const auto config = parse_config(
      "# run settings\n[run]\nmodality = acoustic:M+FS\nseed = 9\n\n[svr]\nc = 2.5\n"
      "[relief]\nthresholds = 0.02, 0\nks = 5,10\n[face]\nwindow = 40\noverlap = 10\n");
  CHECK(config.modality == "acoustic:M+FS");
  CHECK(*config.seed == 9);
  CHECK(config.svr.c == 2.5);
  CHECK(config.relief.thresholds == std::vector<double>{0.02, 0.0});
  CHECK(config.relief.ks == std::vector<int>{5, 10});
  CHECK(config.window.window == 40);
  const auto again = parse_config(format_config(config));
  CHECK(format_config(again) == format_config(config));

  CHECK_THROWS_AS(parse_config("[svr]\nbogus = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("c = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[svr]\nc = abc\n"), ParseError);
}

TEST_CASE("modality names and defaults") {
  const auto m = parse_modality("acoustic:M+FS");
  CHECK(m.feature_selection);
  CHECK(to_string(m) == "acoustic:M+FS");
  CHECK(feature_store_name(m) == "acoustic_M");
  CHECK(default_model(parse_modality("visual")) == ModelKind::Lstm);
  CHECK(default_model(parse_modality("behavioral")) == ModelKind::RepTree);
  CHECK(default_kernel(parse_modality("text:TFIDF")) == models::KernelType::Linear);
  CHECK_THROWS_AS(parse_modality("text:XML"), ArgumentError);
  CHECK_THROWS_AS(parse_modality("olfactory"), ArgumentError);
}

TEST_CASE("resolve validates combinations") {
  PipelineConfig raw;
  raw.corpus = "c";
  raw.output = "o";
  CHECK_THROWS_AS(resolve(raw), ArgumentError);  // no seed
  raw.seed = 1;
  CHECK(resolve(raw).model == ModelKind::RepTree);
  CHECK(resolve(raw).warnings.empty());
  raw.model = "svr";
  CHECK(resolve(raw).warnings.size() == 1);
  raw.model = "lstm";
  CHECK_THROWS_AS(resolve(raw), ArgumentError);
  raw.modality = "visual";
  raw.model = "reptree";
  CHECK_THROWS_AS(resolve(raw), ArgumentError);
  raw.model = "auto";
  CHECK(resolve(raw).raw.lstm.seed == 1);
  raw.modality = "text:WE";
  CHECK_THROWS_AS(resolve(raw), ArgumentError);
  raw.modality = "behavioral";
  raw.lstm.dropout = 1.5;
  CHECK_THROWS_AS(resolve(raw), ArgumentError);
}

TEST_CASE("split files") {
  testing::TempDir dir("splits");
  const std::vector<SplitEntry> entries = {{"300", 4}, {"301", std::nullopt}, {"302", 17}};
  save_split(dir.path() / "s.csv", entries);
  const auto back = load_split(dir.path() / "s.csv");
  REQUIRE(back.size() == 3);
  CHECK(!back[1].score);
  CHECK(*back[2].score == 17);

  std::ofstream(dir.path() / "bad.csv") << "Participant_ID,PHQ8_Score\n300,4\n300,5\n";
  CHECK_THROWS_AS(load_split(dir.path() / "bad.csv"), ParseError);
  std::ofstream(dir.path() / "range.csv") << "Participant_ID,PHQ8_Score\n300,25\n";
  CHECK_THROWS(load_split(dir.path() / "range.csv"));
}

TEST_CASE("synthetic corpus end to end") {
  testing::TempDir dir("pipeline");
  const auto corpus = dir.path() / "corpus";
  gen_synthetic(small_spec(), 5, corpus);
  const auto scanned = scan_corpus(corpus);
  CHECK(scanned.train.size() == 24);
  CHECK(scanned.dev.size() == 8);
  int depressed = 0;
  for (const auto& e : scanned.train) depressed += *e.score >= 10;
  CHECK(depressed == 8);

  const auto config = behavioral(corpus, dir.path() / "out");
  const auto extract = run_extract(config);
  CHECK(extract.sessions == 32);
  CHECK(extract.dimension == 12);
  const auto train = run_train(config);
  CHECK(train.tag == "behavioral_reptree");
  CHECK(fs::exists(train.model_path));
  const auto report = run_eval(config, "dev");
  CHECK(report.metrics.count == 8);
  CHECK(std::isfinite(report.metrics.model.mae));

  SUBCASE("predictions reproduce the report") {
    const auto rows = read_predictions(dir.path() / "out/predictions/behavioral_reptree_dev.csv");
    REQUIRE(rows.size() == 8);
    double abs_sum = 0.0;
    for (const auto& r : rows) abs_sum += std::abs(r.prediction - *r.label);
    CHECK(abs_sum / 8.0 == doctest::Approx(report.metrics.model.mae).epsilon(1e-12));
    const auto recomputed = metrics_of(rows);
    CHECK(recomputed.baseline.rmse == report.metrics.baseline.rmse);
  }

  SUBCASE("cross-validation folds") {
    const auto kfold = run_cv(config, CvScheme::KFold);
    REQUIRE(kfold.folds.size() == 3);
    std::size_t total = 0;
    for (const auto& [f, m] : kfold.folds) {
      CHECK((m.count == 8));
      total += m.count;
    }
    CHECK(total == 24);
    const auto loso = run_cv(config, CvScheme::Loso);
    CHECK(loso.folds.size() == 24);
    for (const auto& [f, m] : loso.folds) {
      CHECK(m.count == 1);
      CHECK(m.model.rmse == doctest::Approx(m.model.mae));
    }
  }

  SUBCASE("identical runs produce identical files") {
    auto a = outputs(dir.path() / "out");
    fs::remove_all(dir.path() / "out");
    full_run(config);
    auto b = outputs(dir.path() / "out");
    CHECK(a.size() == b.size());
    for (const auto& [name, content] : b) CHECK_MESSAGE(a[name] == content, name);
  }

  SUBCASE("dev labels never reach the model") {
    const auto blind = dir.path() / "blind";
    fs::copy(corpus, blind, fs::copy_options::recursive);
    auto dev = load_split(blind / "dev_split.csv");
    for (auto& e : dev) e.score.reset();
    save_split(blind / "dev_split.csv", dev);
    const auto config_blind = behavioral(blind, dir.path() / "out_blind");
    run_extract(config_blind);
    const auto t = run_train(config_blind);
    CHECK(slurp(t.model_path) == slurp(train.model_path));
    CHECK_THROWS_AS(run_eval(config_blind, "dev"), EmptyInputError);
  }

  SUBCASE("an optional test split is scored like dev") {
    CHECK_THROWS_AS(run_eval(config, "test"), ArgumentError);
    const auto with_test = dir.path() / "with_test";
    fs::copy(corpus, with_test, fs::copy_options::recursive);
    fs::copy_file(with_test / "dev_split.csv", with_test / "test_split.csv");
    const auto c2 = behavioral(with_test, dir.path() / "out_test");
    run_extract(c2);
    run_train(c2);
    const auto dev = run_eval(c2, "dev");
    const auto test = run_eval(c2, "test");
    CHECK(test.split == "test");
    CHECK(test.metrics.model.mae == dev.metrics.model.mae);
  }

  SUBCASE("different seeds change the tree") {
    const auto other = behavioral(corpus, dir.path() / "out3", 4);
    run_extract(other);
    CHECK(slurp(run_train(other).model_path) != slurp(train.model_path));
  }
}

TEST_CASE("missing corpus is an io error") {
  testing::TempDir dir("missing");
  const auto config = behavioral(dir.path() / "nope", dir.path() / "out");
  CHECK_THROWS_AS(run_extract(config), IoError);
}

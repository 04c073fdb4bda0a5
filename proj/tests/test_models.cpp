#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "depsev/error.hpp"
#include "depsev/face.hpp"
#include "depsev/models/lstm.hpp"
#include "depsev/models/model_io.hpp"
#include "depsev/models/reptree.hpp"
#include "depsev/models/svr.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace depsev;
using namespace depsev::models;

namespace {

Eigen::MatrixXd window_of(Rng& rng, Eigen::Index steps, Eigen::Index q) {
  return testing::random_matrix(rng, steps, q, -1, 1);
}

face::WindowBatch planted_batch(Rng& rng, int count, int steps, int q) {
  face::WindowBatch batch;
  batch.config = {steps, 0};
  batch.dimension = q;
  for (int i = 0; i < count; ++i) {
    face::Window w;
    w.session_id = std::to_string(i / 4);
    w.samples = window_of(rng, steps, q);
    w.label = 12.0 + 8.0 * w.samples.col(0).mean() - 5.0 * w.samples.col(1).tail(3).mean();
    batch.windows.push_back(std::move(w));
  }
  return batch;
}

}  // namespace

TEST_CASE("svr dual matches exhaustive KKT enumeration") {
  Rng rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const Eigen::MatrixXd x = testing::random_matrix(rng, 5, 1, 0, 4);
    const Eigen::VectorXd y = testing::random_vector(rng, 5, 0, 10);
    SvrConfig config;
    config.c = trial % 2 ? 0.5 : 20.0;
    config.gamma = 1.0;
    config.epsilon = 0.1 + 0.1 * trial;
    config.tolerance = 1e-9;
    const auto model = svr_train(x, y, config);

    const auto oracle = testing::svr_oracle(kernel_matrix(config, model.training_rows), y, config.c, config.epsilon);
    REQUIRE(oracle.has_value());
    CHECK((model.coefficients() - oracle->beta).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(model.bias >= oracle->bias_lo - 1e-6);
    CHECK(model.bias <= oracle->bias_hi + 1e-6);
    SvrModel exact = model;
    exact.alpha = oracle->beta.cwiseMax(0.0);
    exact.alpha_star = (-oracle->beta).cwiseMax(0.0);
    CHECK(std::abs(dual_objective(model, y) - dual_objective(exact, y)) < 1e-6);

    CHECK(model.alpha.minCoeff() >= 0.0);
    CHECK(model.alpha_star.minCoeff() >= 0.0);
    CHECK(model.alpha.maxCoeff() <= config.c + 1e-6);
    CHECK(model.alpha_star.maxCoeff() <= config.c + 1e-6);
    CHECK(std::abs(model.coefficients().sum()) < 1e-6);
  }
}

TEST_CASE("svr linear kernel and tube") {
  Rng rng(32);
  const Eigen::MatrixXd x = testing::random_matrix(rng, 40, 3, -2, 2);
  Eigen::VectorXd y = 3.0 * x.col(0) - x.col(2);
  y.array() += 1.0;
  SvrConfig config;
  config.kernel = KernelType::Linear;
  config.c = 100.0;
  config.epsilon = 0.05;
  config.tolerance = 1e-6;
  const auto model = svr_train(x, y, config);
  const Eigen::VectorXd pred = predict_rows(model, x);
  CHECK((pred - y).cwiseAbs().maxCoeff() <= config.epsilon + 1e-4);

  SvrConfig wide = config;
  wide.epsilon = 100.0;
  const auto flat = svr_train(x, y, wide);
  CHECK(flat.coefficients().isZero());

  const Eigen::VectorXd constant = Eigen::VectorXd::Constant(40, 7.0);
  const auto c = svr_train(x, constant, config);
  CHECK((predict_rows(c, x).array() - 7.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("svr is invariant to affine feature maps") {
  Rng rng(33);
  const Eigen::MatrixXd x = testing::random_matrix(rng, 30, 4, 0, 1);
  const Eigen::VectorXd y = testing::random_vector(rng, 30, 0, 24);
  Eigen::MatrixXd moved = (x * 250.0).array() - 40.0;
  const auto a = svr_train(x, y);
  const auto b = svr_train(moved, y);
  const Eigen::MatrixXd probe = testing::random_matrix(rng, 5, 4, 0, 1);
  const Eigen::MatrixXd probe_moved = (probe * 250.0).array() - 40.0;
  CHECK((predict_rows(a, probe) - predict_rows(b, probe_moved)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(dual_objective(a, y) == doctest::Approx(dual_objective(b, y)));
  CHECK_THROWS_AS(parse_kernel("poly"), ArgumentError);
}

TEST_CASE("reptree learns a step") {
  Rng rng(34);
  const Eigen::MatrixXd x = testing::random_matrix(rng, 60, 3, 0, 1);
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < 60; ++i) y[i] = x(i, 1) > 0.3 ? 5.0 : 1.0;
  const auto tree = reptree_train(x, y, {}, 7);
  CHECK(tree.nodes[0].feature == 1);
  CHECK(tree.leaf_count() == 2);
  const Eigen::MatrixXd probe = testing::random_matrix(rng, 20, 3, 0, 1);
  const Eigen::VectorXd pred = predict_rows(tree, probe);
  for (Eigen::Index i = 0; i < 20; ++i) {
    if (std::abs(probe(i, 1) - 0.3) > 0.05) CHECK(pred[i] == (probe(i, 1) > 0.3 ? 5.0 : 1.0));
  }
}

TEST_CASE("reptree pruning property over random datasets") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    const Eigen::Index n = 6 + static_cast<Eigen::Index>(rng.below(80));
    const Eigen::MatrixXd x = testing::random_matrix(rng, n, 1 + static_cast<Eigen::Index>(rng.below(5)), 0, 1);
    Eigen::VectorXd y = testing::random_vector(rng, n, 0, 24);
    if (seed % 2) y.array() += 10.0 * x.col(0).array();
    const auto tree = reptree_train(x, y, {}, seed);
    CHECK(tree.pruning_sse_after <= tree.pruning_sse_before);
    const auto split = split_grow_prune(n, tree.config.prune_fraction, seed);
    double lo = 1e300, hi = -1e300;
    for (auto i : split.grow) {
      lo = std::min(lo, y[i]);
      hi = std::max(hi, y[i]);
    }
    const Eigen::VectorXd pred = predict_rows(tree, testing::random_matrix(rng, 20, x.cols(), -1, 2));
    CHECK(pred.minCoeff() >= lo);
    CHECK(pred.maxCoeff() <= hi);
  }
}

TEST_CASE("reptree pruning shrinks a noise tree") {
  Rng rng(35);
  const Eigen::MatrixXd x = testing::random_matrix(rng, 90, 5, 0, 1);
  const Eigen::VectorXd y = testing::random_vector(rng, 90, 0, 24);
  RepTreeConfig config;
  const auto pruned = reptree_train(x, y, config, 3);
  config.prune = false;
  const auto full = reptree_train(x, y, config, 3);
  CHECK(pruned.pruning_sse_after <= pruned.pruning_sse_before);
  CHECK(pruned.leaf_count() < full.leaf_count());

  const auto split = split_grow_prune(90, 1.0 / 3.0, 3);
  CHECK(split.prune.size() == 30);
  CHECK(split.grow.size() == 60);

  const auto flat = reptree_train(x, Eigen::VectorXd::Constant(90, 4.0), {}, 3);
  CHECK(flat.nodes.size() == 1);
  CHECK(predict(flat, x.row(0).transpose()) == 4.0);
  CHECK_THROWS_AS(reptree_train(x.topRows(5), y.head(5)), ArgumentError);
}

TEST_CASE("lstm gradient agrees with finite differences") {
  Rng rng(36);
  LstmConfig config;
  config.hidden = 5;
  config.seed = 11;
  auto model = lstm_init(3, config);
  model.running_mean = testing::random_vector(rng, 5, -0.2, 0.2);
  model.running_var = testing::random_vector(rng, 5, 0.5, 1.5);
  model.params.bn_gamma = testing::random_vector(rng, 5, 0.5, 1.5);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::MatrixXd w = window_of(rng, 4, 3);
    CHECK(lstm_gradient_check(model, w, 9.0, 1e-5) < 1e-4);
  }
}

TEST_CASE("lstm head-bias gradient and loss scaling") {
  Rng rng(37);
  LstmConfig config;
  config.hidden = 4;
  const auto model = lstm_init(3, config);
  std::vector<Eigen::MatrixXd> windows;
  std::vector<double> targets;
  for (int i = 0; i < 6; ++i) {
    windows.push_back(window_of(rng, 5, 3));
    targets.push_back(rng.uniform(0, 24));
  }
  std::vector<const Eigen::MatrixXd*> ptrs;
  double mean_residual = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    ptrs.push_back(&windows[i]);
    mean_residual += (predict(model, windows[i]) - targets[i]) / 6.0;
  }
  auto grad = model.params.zeros_like();
  const double loss = lstm_loss(model, ptrs, targets, LstmMode::Inference, &grad);
  CHECK(grad.head_bias == doctest::Approx(2.0 * mean_residual));

  auto scaled = model.params.zeros_like();
  const double loss3 = lstm_loss(model, ptrs, targets, LstmMode::Inference, &scaled, nullptr, 3.0);
  CHECK(loss3 == doctest::Approx(3.0 * loss));
  CHECK(scaled.flatten().isApprox(3.0 * grad.flatten(), 1e-12));

  Rng a(5), b(5);
  auto ga = model.params.zeros_like();
  auto gb = model.params.zeros_like();
  CHECK(lstm_loss(model, ptrs, targets, LstmMode::Training, &ga, &a) ==
        lstm_loss(model, ptrs, targets, LstmMode::Training, &gb, &b));
  CHECK(ga.flatten() == gb.flatten());
  CHECK_THROWS(lstm_loss(model, ptrs, targets, LstmMode::Training, &ga, nullptr));
}

TEST_CASE("lstm gates stay in range") {
  Rng rng(38);
  const auto model = lstm_init(4, LstmConfig{});
  const Eigen::MatrixXd w = 50.0 * window_of(rng, 12, 4);
  LstmTrace trace;
  predict(model, w, &trace);
  for (int layer = 0; layer < 2; ++layer) {
    REQUIRE(trace.input_gate[layer].size() == 12);
    for (int t = 0; t < 12; ++t) {
      for (const auto* gate : {&trace.input_gate[layer][t], &trace.forget_gate[layer][t],
                               &trace.output_gate[layer][t]}) {
        CHECK(gate->minCoeff() >= 0.0);
        CHECK(gate->maxCoeff() <= 1.0);
      }
      CHECK(trace.candidate[layer][t].cwiseAbs().maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("lstm fits a planted signal and is deterministic") {
  Rng rng(39);
  const auto train = planted_batch(rng, 96, 6, 3);
  const auto validation = planted_batch(rng, 24, 6, 3);
  LstmConfig config;
  config.hidden = 8;
  config.dropout = 0.1;
  config.learning_rate = 0.02;
  config.batch_size = 16;
  config.epochs = 80;
  config.seed = 4;
  const auto model = lstm_train(train, validation, config);
  REQUIRE(model.train_loss.size() == 81);
  const double best = model.train_loss[static_cast<std::size_t>(model.best_epoch)];
  CHECK(best <= 0.1 * model.train_loss[0]);
  CHECK(model.validation_loss[static_cast<std::size_t>(model.best_epoch)] ==
        *std::min_element(model.validation_loss.begin(), model.validation_loss.end()));

  const auto again = lstm_train(train, validation, config);
  CHECK(again.params.flatten() == model.params.flatten());
  CHECK(again.running_var == model.running_var);

  auto other = config;
  other.seed = 5;
  CHECK(lstm_train(train, validation, other).params.flatten() != model.params.flatten());

  face::WindowBatch wrong = train;
  wrong.dimension = 4;
  for (auto& w : wrong.windows) w.samples = window_of(rng, 6, 4);
  CHECK_THROWS_AS(lstm_train(wrong, validation, config), ArgumentError);
}

TEST_CASE("golden predictions") {
  Rng rng(40);
  const Eigen::MatrixXd x = testing::random_matrix(rng, 48, 4, 0, 1);
  Eigen::VectorXd y(48);
  for (Eigen::Index i = 0; i < 48; ++i) y[i] = std::round(24.0 * x(i, 0) * x(i, 1) + 2.0 * x(i, 3));
  const Eigen::MatrixXd probe = testing::random_matrix(rng, 8, 4, 0, 1);
  const auto batch = planted_batch(rng, 32, 5, 3);
  LstmConfig lc;
  lc.hidden = 4;
  lc.epochs = 10;
  lc.batch_size = 8;
  const auto lstm = lstm_train(batch, {}, lc);

  std::vector<double> values;
  for (double v : predict_rows(svr_train(x, y), probe)) values.push_back(v);
  for (double v : predict_rows(reptree_train(x, y, {}, 2), probe)) values.push_back(v);
  for (std::size_t i = 0; i < 8; ++i) values.push_back(predict(lstm, batch.windows[i].samples));

  const std::string path = std::string(DEPSEV_TEST_DATA) + "/golden_predictions.txt";
  if (std::getenv("DEPSEV_UPDATE_GOLDEN")) {
    std::ofstream out(path);
    out.precision(17);
    for (double v : values) out << v << '\n';
  }
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<double> golden;
  for (double v; in >> v;) golden.push_back(v);
  REQUIRE(golden.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(values[i] == doctest::Approx(golden[i]).epsilon(1e-9));
}

TEST_CASE("model files round trip") {
  Rng rng(41);
  const Eigen::MatrixXd x = testing::random_matrix(rng, 30, 3, 0, 1);
  const Eigen::VectorXd y = testing::random_vector(rng, 30, 0, 24);
  const std::vector<AnyModel> models = {mean_train(y, 3), svr_train(x, y), reptree_train(x, y)};
  testing::TempDir dir("models");
  for (const auto& m : models) {
    StoredModel stored{m, {"a", "b", "c"}, {{"seed", "7"}}};
    const auto path = dir.path() / (model_kind(m) + ".model");
    save_model(path, stored);
    const auto back = load_model(path);
    CHECK(model_kind(back.model) == model_kind(m));
    CHECK(back.columns == stored.columns);
    REQUIRE(back.meta("seed"));
    CHECK(*back.meta("seed") == "7");
    CHECK(predict_rows(back.model, x) == predict_rows(m, x));
    CHECK(format_model(back) == format_model(stored));
  }

  const auto batch = planted_batch(rng, 16, 4, 3);
  LstmConfig lc;
  lc.hidden = 3;
  lc.epochs = 2;
  const auto lstm = lstm_train(batch, {}, lc);
  const auto back = parse_model(format_model({lstm, {"pc0", "pc1", "pc2"}, {}}));
  const auto& restored = std::get<LstmModel>(back.model);
  CHECK(predict(restored, batch.windows[0].samples) == predict(lstm, batch.windows[0].samples));
  CHECK_THROWS_AS(predict_rows(back.model, x), ArgumentError);

  std::string text = format_model({models[0], {"a", "b", "c"}, {}});
  text.replace(text.find("depsev-model 1"), 14, "depsev-model 9");
  CHECK_THROWS_AS(parse_model(text), ParseError);
  CHECK_THROWS_AS(parse_model("depsev-model 1\nkind forest\n"), ParseError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "depsev/face.hpp"
#include "depsev/pca.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace depsev;
using namespace depsev::face;

namespace {

LandmarkPoints random_face(Rng& rng) {
  LandmarkPoints p;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) p(i, j) = rng.uniform(-1.0, 1.0);
  }
  return p;
}

LandmarkSequence sequence_at(double fps, double seconds, Rng& rng, double failure = 0.0) {
  LandmarkSequence seq;
  const auto n = static_cast<int>(seconds * fps);
  for (int k = 0; k <= n; ++k) {
    LandmarkFrame f;
    f.timestamp = k / fps;
    f.success = !rng.bernoulli(failure);
    f.confidence = f.success ? 0.9 : 0.0;
    f.points = random_face(rng);
    seq.frames.push_back(f);
  }
  return seq;
}

}  // namespace

TEST_CASE("normalization removes translation and scale") {
  Rng rng(1);
  const LandmarkPoints p = random_face(rng);
  const LandmarkPoints n = normalize_landmarks(p);
  CHECK(n.colwise().mean().norm() < 1e-12);
  CHECK(n.rowwise().norm().mean() == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::Matrix3d rot;
  const double a = 0.3;
  rot << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  LandmarkPoints moved = (7.5 * p * rot.transpose()).rowwise() + Eigen::RowVector3d(3, -2, 500);
  const auto d0 = frame_descriptor(p);
  const auto d1 = frame_descriptor(moved);
  CHECK(d0.size() == kGeometricDim);
  // distances are rotation invariant, coordinates are not
  CHECK(d0.tail(kGeometricDim - 3 * kNumLandmarks).isApprox(d1.tail(kGeometricDim - 3 * kNumLandmarks), 1e-10));

  CHECK_THROWS_AS(normalize_landmarks(LandmarkPoints::Ones().eval()), NumericError);
}

TEST_CASE("descriptor layout") {
  Eigen::Matrix<double, 3, 3> tri;
  tri << 0, 0, 0, 3, 0, 0, 0, 4, 0;
  const auto v = geometric_vector(tri);
  REQUIRE(v.size() == 12);
  CHECK(v[1] == 3.0);
  CHECK(v[5] == 4.0);
  CHECK(v[9] == 3.0);
  CHECK(v[10] == 4.0);
  CHECK(v[11] == 5.0);
}

TEST_CASE("per-second downsampling picks the nearest frame") {
  LandmarkSequence seq;
  for (double t : {0.2, 0.9, 1.6, 1.95, 2.5, 3.5, 4.1}) {
    LandmarkFrame f;
    f.timestamp = t;
    f.success = t != 1.95;
    seq.frames.push_back(f);
  }
  const auto s = downsample_per_second(seq);
  CHECK(s.frame_index == std::vector<std::size_t>{1, 3, 4, 6});
  CHECK(s.valid == std::vector<std::uint8_t>{1, 0, 1, 1});
}

TEST_CASE("window starts against enumeration") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng.below(400);
    const int window = 1 + static_cast<int>(rng.below(80));
    const WindowConfig config{window, static_cast<int>(rng.below(static_cast<std::uint64_t>(window)))};
    const double failure = trial % 2 ? 0.0 : 0.01;
    std::vector<std::uint8_t> valid(n);
    for (auto& v : valid) v = rng.bernoulli(failure) ? 0 : 1;
    const auto starts = window_starts(valid, config);

    const std::size_t w = static_cast<std::size_t>(config.window);
    const std::size_t stride = w - static_cast<std::size_t>(config.overlap);
    const auto expected = testing::window_oracle(valid, w, static_cast<std::size_t>(config.overlap));
    CHECK(starts == expected);
    if (failure == 0.0) {
      const std::size_t closed = n < w ? 0 : (n - w) / stride + 1;
      CHECK(starts.size() == closed);
    }
  }
  const std::vector<std::uint8_t> none;
  CHECK_THROWS_AS(window_starts(none, WindowConfig{10, 10}), ArgumentError);
}

TEST_CASE("pca recovers a planted rank") {
  Rng rng(2);
  const Eigen::MatrixXd basis = testing::random_matrix(rng, 3, 12, -1, 1);
  const Eigen::MatrixXd scores = testing::random_matrix(rng, 80, 3, -5, 5);
  Eigen::MatrixXd rows = scores * basis;
  rows.rowwise() += testing::random_vector(rng, 12, -2, 2).transpose();
  const auto pca = fit_pca(rows, 0.999999);
  CHECK(pca.dim() == 3);
  CHECK(pca.explained_ratio == doctest::Approx(1.0));
  CHECK((pca.components * pca.components.transpose()).isIdentity(1e-10));
  const Eigen::MatrixXd back = pca.reconstruct_rows(pca.project_rows(rows));
  CHECK((back - rows).cwiseAbs().maxCoeff() < 1e-9);

  // wide input goes through the Gram path
  const auto wide = fit_pca(rows.topRows(6), 0.999999);
  CHECK(wide.dim() == 3);

  PcaAccumulator acc;
  acc.add(rows.topRows(30));
  acc.add(rows.middleRows(30, 25));
  acc.add(rows.bottomRows(25));
  CHECK(acc.count() == 80);
  const auto streamed = acc.fit(0.999999);
  REQUIRE(streamed.dim() == 3);
  CHECK(streamed.mean.isApprox(pca.mean, 1e-12));
  CHECK(streamed.eigenvalues.head(3).isApprox(pca.eigenvalues.head(3), 1e-9));
  for (Eigen::Index k = 0; k < 3; ++k) {
    CHECK(std::abs(streamed.components.row(k).dot(pca.components.row(k))) == doctest::Approx(1.0));
  }

  CHECK_THROWS(fit_pca(rows.topRows(1)));
  CHECK_THROWS(fit_pca(rows, 1.5));
}

TEST_CASE("pca file round trip") {
  Rng rng(3);
  const auto pca = fit_pca(testing::random_matrix(rng, 20, 5, -1, 1), 0.9);
  testing::TempDir dir("pca");
  save_pca(dir.path() / "p.txt", pca);
  const auto back = load_pca(dir.path() / "p.txt");
  CHECK(back.components.isApprox(pca.components, 1e-15));
  CHECK(back.mean.isApprox(pca.mean, 1e-15));
}

TEST_CASE("session windows and batch file") {
  Rng rng(4);
  const auto seq = sequence_at(2.0, 40.0, rng);
  const auto descriptors = sampled_descriptors(seq);
  CHECK(descriptors.rows() == 41);
  CHECK(descriptors.cols() == kGeometricDim);
  const auto pca = fit_pca(descriptors, 0.9);

  const WindowConfig config{10, 5};
  auto batch = window_sequence("301", seq, pca, 7.0, config);
  CHECK(batch.windows.size() == 7);
  CHECK(batch.dimension == pca.dim());
  CHECK(batch.windows[1].start == 5);
  CHECK(batch.windows[1].samples.row(0).transpose().isApprox(pca.project(descriptors.row(5).transpose())));

  auto unlabeled = window_sequence("302", seq, pca, std::nullopt, config);
  for (auto& w : unlabeled.windows) batch.windows.push_back(w);

  testing::TempDir dir("windows");
  write_window_batch(dir.path() / "w.windows", batch);
  const auto back = read_window_batch(dir.path() / "w.windows");
  REQUIRE(back.windows.size() == batch.windows.size());
  CHECK(back.config.window == 10);
  CHECK(back.config.overlap == 5);
  CHECK(back.windows[0].label == 7.0);
  CHECK(std::isnan(back.windows.back().label));
  CHECK(back.windows.back().session_id == "302");
  for (std::size_t i = 0; i < back.windows.size(); ++i) {
    CHECK(back.windows[i].samples.isApprox(batch.windows[i].samples, 1e-15));
  }
}

TEST_CASE("window predictions aggregate per session") {
  const std::vector<double> preds = {4.0, 6.0, 11.0};
  const auto s = aggregate_predictions(preds, 2.0);
  CHECK(s.score == 7.0);
  CHECK_FALSE(s.used_fallback);
  const auto f = aggregate_predictions({}, 2.0);
  CHECK(f.score == 2.0);
  CHECK(f.used_fallback);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "depsev/error.hpp"
#include "depsev/text.hpp"
#include "support.hpp"

using namespace depsev;
using namespace depsev::text;

namespace {

std::vector<Document> three_docs() {
  return {{"i", "feel", "tired", "tired"}, {"i", "feel", "fine"}, {"i", "sleep"}};
}

}  // namespace

TEST_CASE("participant document") {
  const std::vector<TurnRecord> turns = {
      {0, 1, Speaker::Agent, {"how", "are", "you"}},
      {1, 2, Speaker::Participant, {"fine"}},
      {2, 3, Speaker::Participant, {"thanks"}},
  };
  CHECK(build_document(turns) == Document{"fine", "thanks"});
}

TEST_CASE("tf-idf by hand") {
  const auto docs = three_docs();
  const auto model = fit_text_model(docs);
  CHECK(model.vocabulary.tokens() == std::vector<std::string>{"feel", "fine", "i", "sleep", "tired"});
  CHECK(model.training_docs == 3);
  const double idf_feel = std::log(3.0 / 2.0) + 1.0;
  const double idf_once = std::log(3.0) + 1.0;
  CHECK(model.idf[2] == doctest::Approx(1.0));
  CHECK(model.idf[0] == doctest::Approx(idf_feel));

  const auto x = vectorize(docs, model, Weighting::TfIdf);
  REQUIRE(x.rows() == 3);
  REQUIRE(x.cols() == 5);
  CHECK(x(0, 4) == doctest::Approx(2.0 * idf_once));
  CHECK(x(0, 0) == doctest::Approx(idf_feel));
  CHECK(x(0, 2) == doctest::Approx(1.0));
  CHECK(x(0, 1) == 0.0);
  CHECK(x(2, 3) == doctest::Approx(idf_once));

  const auto b = vectorize(docs, model, Weighting::Bool);
  CHECK(b(0, 4) == 1.0);
  CHECK(b.row(1).sum() == 3.0);
}

TEST_CASE("out-of-vocabulary tokens are ignored") {
  const auto model = fit_text_model(three_docs());
  const std::vector<Document> unseen = {{"hopeless", "tired"}, {"nothing", "known"}};
  const auto x = vectorize(unseen, model, Weighting::TfIdf);
  CHECK(x.row(0).sum() == doctest::Approx(std::log(3.0) + 1.0));
  CHECK(x.row(1).isZero());
  CHECK(model.vocabulary.index("hopeless") == -1);
}

TEST_CASE("weighting names") {
  CHECK(parse_weighting("TFIDF") == Weighting::TfIdf);
  CHECK(parse_weighting("BOOL") == Weighting::Bool);
  CHECK(to_string(Weighting::TfIdf) == "TFIDF");
  CHECK_THROWS_AS(parse_weighting("counts"), ArgumentError);
}

TEST_CASE("text model round trip") {
  testing::TempDir dir("text");
  const auto model = fit_text_model(three_docs());
  save_text_model(dir.path() / "text_model.txt", model);
  const auto loaded = load_text_model(dir.path() / "text_model.txt");
  CHECK(loaded.vocabulary.tokens() == model.vocabulary.tokens());
  CHECK(loaded.training_docs == 3);
  CHECK(loaded.idf.isApprox(model.idf, 1e-15));
}

TEST_CASE("embedding averages") {
  const auto table = parse_embeddings("sad 1 0 2\nhappy -1 4 0\n");
  CHECK(table.dimension() == 3);
  CHECK(table.size() == 2);
  const auto v = embed_average({"sad", "happy", "unknown", "sad"}, table);
  CHECK(v.isApprox(Eigen::Vector3d(1.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0)));
  CHECK(embed_average({"unknown"}, table).isZero());
  CHECK_THROWS_AS(parse_embeddings("sad 1 0\nhappy 1\n"), ParseError);
}

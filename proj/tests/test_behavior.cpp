#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "depsev/behavior.hpp"
#include "depsev/error.hpp"
#include "depsev/io.hpp"
#include "support.hpp"

using namespace depsev;
using namespace depsev::behavior;

namespace {

TurnRecord agent(double a, double b, const std::string& text) {
  return {a, b, Speaker::Agent, tokenize(text)};
}
TurnRecord participant(double a, double b, const std::string& text) {
  return {a, b, Speaker::Participant, tokenize(text)};
}

// Quantile by counting: the value at fractional rank p(n-1) among sorted values.
double quantile_oracle(const std::vector<double>& v, double p) {
  const double rank = p * static_cast<double>(v.size() - 1);
  auto kth = [&](std::size_t k) {
    for (double candidate : v) {
      const auto below = std::count_if(v.begin(), v.end(), [&](double x) { return x < candidate; });
      const auto equal = std::count(v.begin(), v.end(), candidate);
      if (static_cast<std::size_t>(below) <= k && k < static_cast<std::size_t>(below + equal)) return candidate;
    }
    return 0.0;
  };
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return kth(lo) + (rank - std::floor(rank)) * (kth(hi) - kth(lo));
}

}  // namespace

TEST_CASE("quartiles agree with a counting oracle") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + rng.below(30));
    for (auto& x : v) x = std::round(rng.uniform(0.0, 10.0) * 4.0) / 4.0;  // ties likely
    const auto q = quartiles(v);
    CHECK(q.q1 == doctest::Approx(quantile_oracle(v, 0.25)));
    CHECK(q.median == doctest::Approx(quantile_oracle(v, 0.5)));
    CHECK(q.q3 == doctest::Approx(quantile_oracle(v, 0.75)));
  }
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK_THROWS_AS(quantile({}, 0.5), EmptyInputError);
  const auto empty = quartiles(std::vector<double>{});
  CHECK(empty.median == 0.0);
}

TEST_CASE("non-vocal counts") {
  const std::vector<TurnRecord> turns = {
      agent(0, 1, "hello <laughter>"),
      participant(1.5, 3, "um i am <laughter> fine"),
      participant(3.5, 4, "<sigh> uh"),
  };
  const auto nb = nonvocal_features(turns);
  CHECK(nb.laughter_frequency == 0.5);
  CHECK(nb.disfluency_percentage == doctest::Approx(100.0 * 2.0 / 7.0));
  CHECK(nb.inconvenience_count == 1.0);
  const std::vector<TurnRecord> none = {agent(0, 1, "hi")};
  CHECK_THROWS_AS(nonvocal_features(none), EmptyInputError);
}

TEST_CASE("response times and pauses use adjacent turns") {
  const std::vector<TurnRecord> turns = {
      agent(0, 2, "question"), participant(2.5, 4, "a"), participant(4.75, 5, "b"),
      agent(5.5, 6, "q"),      participant(5.8, 7, "overlap"), agent(8, 9, "q"),
      agent(9.5, 10, "q"),     participant(11, 12, "c"),
  };
  CHECK(response_times(turns) == std::vector<double>{0.5, 0.0, 1.0});
  CHECK(within_speaker_pauses(turns) == std::vector<double>{0.75});
  const auto tb = turn_taking_features(turns);
  CHECK(tb.response.median == 0.5);
  CHECK(tb.pause.q3 == 0.75);
}

TEST_CASE("previously diagnosed information") {
  std::vector<TurnRecord> turns = {
      agent(0, 1, "have you been diagnosed with ptsd"),
      participant(1.5, 2, "no i haven't"),
      agent(3, 4, "have you ever been diagnosed with depression"),
      participant(4.5, 5, "hmm well"),
      agent(6, 7, "so were you diagnosed with depression"),
      participant(7.5, 8, "yeah i have"),
  };
  const auto pdi = pdi_features(turns);
  CHECK(pdi.values[0] == 0);
  CHECK(pdi.values[1] == 1);
  CHECK(pdi.values[2] == -1);
  CHECK(pdi.diagnostics.ambiguous[1] == 1);

  turns.push_back(agent(9, 10, "did you like school"));
  turns.push_back(participant(10.5, 11, "yes"));
  CHECK(pdi_features(turns).values[2] == -1);
  turns.push_back(agent(12, 13, "have you served in the military"));
  turns.push_back(participant(13.5, 14, "yes but no longer"));
  CHECK(pdi_features(turns).values[2] == 1);  // earliest phrase wins
}

TEST_CASE("behavior vector layout") {
  const std::vector<TurnRecord> turns = {
      agent(0, 1, "have you ever been diagnosed with depression"),
      participant(1.5, 2, "no"),
      agent(2.5, 3, "tell me more"),
      participant(4, 5, "um <laughter>"),
  };
  const auto v = behavior_vector(turns);
  CHECK(v.values.size() == 12);
  CHECK(behavior_feature_names()[4] == "tb_response_median");
  CHECK(v.values[4] == doctest::Approx(0.75));
  CHECK(v.values[10] == 0.0);
  for (int k = 9; k < 12; ++k) CHECK((v.values[k] == -1.0 || v.values[k] == 0.0 || v.values[k] == 1.0));
}

TEST_CASE("lexicon overrides replace the default lists") {
  const auto lex = parse_lexicon("# custom\n[affirm]\nAbsolutely\n[topic.mb]\nveteran\n");
  CHECK(lex.affirmations == std::vector<std::string>{"absolutely"});
  CHECK(lex.topic_keywords[2] == std::vector<std::string>{"veteran"});
  CHECK(lex.negations == Lexicon{}.negations);
  CHECK_THROWS_AS(parse_lexicon("[colors]\nred\n"), ParseError);
  CHECK_THROWS_AS(parse_lexicon("orphan\n"), ParseError);
  const std::vector<TurnRecord> turns = {agent(0, 1, "are you a veteran"),
                                         participant(2, 3, "absolutely")};
  CHECK(pdi_features(turns, lex).values[2] == 1);
}

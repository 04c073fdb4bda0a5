#include "depsev/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "depsev/error.hpp"
#include "depsev/io.hpp"

namespace depsev::behavior {
namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

// Earliest token position where any phrase of `phrases` starts, or npos.
std::size_t first_match(const std::vector<std::string>& tokens,
                        const std::vector<std::string>& phrases) {
  std::size_t best = std::string::npos;
  for (const auto& phrase : phrases) {
    const auto words = tokenize(phrase);
    if (words.empty() || words.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + words.size() <= tokens.size() && i < best; ++i) {
      if (std::equal(words.begin(), words.end(), tokens.begin() + static_cast<long>(i))) {
        best = i;
        break;
      }
    }
  }
  return best;
}

std::optional<int> classify_answer(const TurnRecord& answer, const Lexicon& lexicon) {
  const auto yes = first_match(answer.tokens, lexicon.affirmations);
  const auto no = first_match(answer.tokens, lexicon.negations);
  if (yes == std::string::npos && no == std::string::npos) return std::nullopt;
  return yes < no ? 1 : 0;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

Lexicon parse_lexicon(std::string_view content) {
  Lexicon lex;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= content.size()) {
    auto end = content.find('\n', begin);
    if (end == std::string_view::npos) end = content.size();
    const std::string line = trim(content.substr(begin, end - begin));
    begin = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {
      if (end == content.size()) break;
      continue;
    }
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      static const std::set<std::string> kSections = {
          "disfluency", "inconvenience", "laughter", "topic.ptsd",
          "topic.dep",  "topic.mb",      "affirm",   "negate"};
      if (!kSections.count(section)) {
        throw ParseError("<lexicon>", line_no, "unknown section [" + section + "]");
      }
      if (seen.insert(section).second) {
        if (section == "disfluency") lex.disfluencies.clear();
        if (section == "inconvenience") lex.inconvenience_cues.clear();
        if (section == "topic.ptsd") lex.topic_keywords[0].clear();
        if (section == "topic.dep") lex.topic_keywords[1].clear();
        if (section == "topic.mb") lex.topic_keywords[2].clear();
        if (section == "affirm") lex.affirmations.clear();
        if (section == "negate") lex.negations.clear();
      }
    } else {
      if (section.empty()) throw ParseError("<lexicon>", line_no, "entry outside a section");
      std::string entry = line;
      std::transform(entry.begin(), entry.end(), entry.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (section == "disfluency") lex.disfluencies.insert(entry);
      if (section == "inconvenience") lex.inconvenience_cues.insert(entry);
      if (section == "laughter") lex.laughter = entry;
      if (section == "topic.ptsd") lex.topic_keywords[0].push_back(entry);
      if (section == "topic.dep") lex.topic_keywords[1].push_back(entry);
      if (section == "topic.mb") lex.topic_keywords[2].push_back(entry);
      if (section == "affirm") lex.affirmations.push_back(entry);
      if (section == "negate") lex.negations.push_back(entry);
    }
    if (end == content.size()) break;
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(read_text_file(path));
}

const std::array<std::string, kBehaviorDim>& behavior_feature_names() {
  static const std::array<std::string, kBehaviorDim> kNames = {
      "nb_laughter_freq",   "nb_disfluency_pct", "nb_inconvenience_count",
      "tb_response_q1",     "tb_response_median", "tb_response_q3",
      "tb_pause_q1",        "tb_pause_median",    "tb_pause_q3",
      "pdi_ptsd",           "pdi_dep",            "pdi_mb"};
  return kNames;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyInputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  if (values.empty()) return {};
  std::vector<double> v(values.begin(), values.end());
  return {quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)};
}

NonVocal nonvocal_features(std::span<const TurnRecord> turns, const Lexicon& lexicon) {
  int participant_turns = 0;
  int tokens = 0;
  int laughs = 0;
  int disfluent = 0;
  int cues = 0;
  for (const auto& turn : turns) {
    if (turn.speaker != Speaker::Participant) continue;
    ++participant_turns;
    for (const auto& token : turn.tokens) {
      ++tokens;
      if (token == lexicon.laughter) ++laughs;
      if (lexicon.disfluencies.count(token)) ++disfluent;
      if (lexicon.inconvenience_cues.count(token)) ++cues;
    }
  }
  if (participant_turns == 0) throw EmptyInputError("no participant turns");
  NonVocal out;
  out.laughter_frequency = static_cast<double>(laughs) / participant_turns;
  out.disfluency_percentage = tokens > 0 ? 100.0 * disfluent / tokens : 0.0;
  out.inconvenience_count = cues;
  return out;
}

std::vector<double> response_times(std::span<const TurnRecord> turns) {
  std::vector<double> out;
  for (std::size_t i = 1; i < turns.size(); ++i) {
    if (turns[i].speaker == Speaker::Participant && turns[i - 1].speaker == Speaker::Agent) {
      out.push_back(std::max(0.0, turns[i].start - turns[i - 1].stop));
    }
  }
  return out;
}

std::vector<double> within_speaker_pauses(std::span<const TurnRecord> turns) {
  std::vector<double> out;
  for (std::size_t i = 1; i < turns.size(); ++i) {
    if (turns[i].speaker == Speaker::Participant && turns[i - 1].speaker == Speaker::Participant) {
      out.push_back(std::max(0.0, turns[i].start - turns[i - 1].stop));
    }
  }
  return out;
}

TurnTaking turn_taking_features(std::span<const TurnRecord> turns) {
  if (turns.empty()) throw EmptyInputError("empty transcript");
  const auto response = response_times(turns);
  const auto pause = within_speaker_pauses(turns);
  return {quartiles(response), quartiles(pause)};
}

Pdi pdi_features(std::span<const TurnRecord> turns, const Lexicon& lexicon) {
  Pdi out;
  for (std::size_t topic = 0; topic < kPdiTopics.size(); ++topic) {
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (turns[i].speaker != Speaker::Agent) continue;
      const std::string text = join(turns[i].tokens);
      const auto& keywords = lexicon.topic_keywords[topic];
      const bool asked = std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
        return text.find(k) != std::string::npos;
      });
      if (!asked) continue;
      std::size_t j = i + 1;
      while (j < turns.size() && turns[j].speaker != Speaker::Participant) ++j;
      if (j == turns.size()) continue;
      // An unclassifiable answer is recorded; a later query on the same topic
      // may still settle it.
      if (const auto answer = classify_answer(turns[j], lexicon)) {
        out.values[topic] = *answer;
        break;
      }
      ++out.diagnostics.ambiguous[topic];
    }
  }
  return out;
}

BehaviorVector behavior_vector(std::span<const TurnRecord> turns, const Lexicon& lexicon) {
  const auto nb = nonvocal_features(turns, lexicon);
  const auto tb = turn_taking_features(turns);
  const auto pdi = pdi_features(turns, lexicon);
  BehaviorVector out;
  out.values << nb.laughter_frequency, nb.disfluency_percentage, nb.inconvenience_count,
      tb.response.q1, tb.response.median, tb.response.q3, tb.pause.q1, tb.pause.median,
      tb.pause.q3, pdi.values[0], pdi.values[1], pdi.values[2];
  out.diagnostics = pdi.diagnostics;
  return out;
}

}  // namespace depsev::behavior

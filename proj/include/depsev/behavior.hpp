#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "depsev/types.hpp"

namespace depsev::behavior {

enum class PdiTopic { Ptsd, Depression, Military };
inline constexpr std::array<PdiTopic, 3> kPdiTopics = {PdiTopic::Ptsd, PdiTopic::Depression,
                                                       PdiTopic::Military};

// Word lists driving the behavioral features. Multi-word entries are token
// sequences ("i have"); topic keywords match as substrings of agent text.
struct Lexicon {
  std::set<std::string> disfluencies{"um", "uh", "er", "mm", "mhm", "hmm", "uh-huh", "<disfluency>"};
  std::set<std::string> inconvenience_cues{"<sigh>",   "<whistling>", "<whisper>",
                                           "<deep_breath>", "<mumble>", "<clears_throat>"};
  std::string laughter = "<laughter>";
  std::array<std::vector<std::string>, 3> topic_keywords{
      std::vector<std::string>{"ptsd", "post traumatic"},
      std::vector<std::string>{"depress"},
      std::vector<std::string>{"military", "served", "deployment"}};
  std::vector<std::string> affirmations{"yes", "yeah", "yep", "i have", "i do"};
  std::vector<std::string> negations{"no", "nope", "never", "i haven't", "i don't"};
};

// Plain-text lexicon file: `[section]` headers (disfluency, inconvenience,
// laughter, topic.ptsd, topic.dep, topic.mb, affirm, negate) followed by one
// entry per line. A section present in the file replaces the default list;
// `#` starts a comment line.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view content);

inline constexpr int kBehaviorDim = 12;
using BehaviorValues = Eigen::Matrix<double, kBehaviorDim, 1>;

const std::array<std::string, kBehaviorDim>& behavior_feature_names();

struct NonVocal {
  double laughter_frequency = 0.0;
  double disfluency_percentage = 0.0;
  double inconvenience_count = 0.0;
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct TurnTaking {
  Quartiles response;
  Quartiles pause;
};

struct PdiDiagnostics {
  // Per topic: queries whose answers matched neither lexicon.
  std::array<int, 3> ambiguous{};
};

struct Pdi {
  std::array<int, 3> values{-1, -1, -1};
  PdiDiagnostics diagnostics;
};

// Linear interpolation between order statistics at position p * (n - 1).
double quantile(std::vector<double> values, double p);
Quartiles quartiles(std::span<const double> values);

// Throws EmptyInputError when there is no participant turn.
NonVocal nonvocal_features(std::span<const TurnRecord> turns, const Lexicon& lexicon = {});

std::vector<double> response_times(std::span<const TurnRecord> turns);
std::vector<double> within_speaker_pauses(std::span<const TurnRecord> turns);
// Triples with no underlying events are 0. Throws EmptyInputError on an empty transcript.
TurnTaking turn_taking_features(std::span<const TurnRecord> turns);

Pdi pdi_features(std::span<const TurnRecord> turns, const Lexicon& lexicon = {});

struct BehaviorVector {
  BehaviorValues values = BehaviorValues::Zero();
  PdiDiagnostics diagnostics;
};

BehaviorVector behavior_vector(std::span<const TurnRecord> turns, const Lexicon& lexicon = {});

}  // namespace depsev::behavior

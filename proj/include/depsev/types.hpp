#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace depsev {

inline constexpr int kNumLandmarks = 68;
inline constexpr int kMinPhq = 0;
inline constexpr int kMaxPhq = 24;
// PHQ-8 score at or above which a participant counts as depressed.
inline constexpr int kDepressedCutoff = 10;

enum class Speaker { Agent, Participant };

// Mono PCM audio, samples scaled to [-1, 1).
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

struct TurnRecord {
  double start = 0.0;
  double stop = 0.0;
  Speaker speaker = Speaker::Participant;
  std::vector<std::string> tokens;

  bool operator==(const TurnRecord&) const = default;
};

using LandmarkPoints = Eigen::Matrix<double, kNumLandmarks, 3>;

struct LandmarkFrame {
  double timestamp = 0.0;
  double confidence = 0.0;
  bool success = false;
  LandmarkPoints points = LandmarkPoints::Zero();
};

struct LandmarkSequence {
  std::vector<LandmarkFrame> frames;

  bool empty() const { return frames.empty(); }
  std::size_t size() const { return frames.size(); }
};

struct Session {
  std::string id;
  AudioSignal audio;
  std::vector<TurnRecord> turns;
  LandmarkSequence landmarks;
  std::optional<int> label;
};

// Checks the Session invariants and sorts turns by start time (stable).
// Throws ArgumentError on an out-of-range label or a turn with stop <= start.
Session make_session(std::string id, AudioSignal audio, std::vector<TurnRecord> turns,
                     LandmarkSequence landmarks, std::optional<int> label);

inline bool is_depressed(double phq) { return phq >= kDepressedCutoff; }

}  // namespace depsev

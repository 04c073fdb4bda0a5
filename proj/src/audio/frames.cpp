#include "depsev/audio/frames.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "depsev/error.hpp"

namespace depsev::audio {

std::size_t frames_in_span(std::size_t span_samples, int frame_length, int hop) {
  const auto len = static_cast<std::size_t>(frame_length);
  if (span_samples < len) return 0;
  return (span_samples - len) / static_cast<std::size_t>(hop) + 1;
}

Eigen::VectorXd hamming_window(int length) {
  Eigen::VectorXd w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < length; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (length - 1));
  }
  return w;
}

FrameSet frame_signal(const AudioSignal& audio, std::span<const TurnRecord> turns,
                      const FrameConfig& config) {
  if (audio.sample_rate < 8000) {
    throw ArgumentError("sample rate " + std::to_string(audio.sample_rate) + " Hz below 8 kHz");
  }
  const bool any_participant = std::any_of(turns.begin(), turns.end(), [](const TurnRecord& t) {
    return t.speaker == Speaker::Participant;
  });
  if (!any_participant) throw EmptyInputError("no participant turns to frame");

  FrameSet set;
  set.sample_rate = audio.sample_rate;
  set.frame_length = static_cast<int>(std::lround(config.window_seconds * audio.sample_rate));
  set.hop = static_cast<int>(std::lround(config.hop_seconds * audio.sample_rate));
  const auto total = static_cast<long long>(audio.samples.size());

  std::vector<long long> starts;
  for (const auto& turn : turns) {
    if (turn.speaker != Speaker::Participant) continue;
    const long long first = std::clamp(std::llround(turn.start * audio.sample_rate), 0LL, total);
    const long long last = std::clamp(std::llround(turn.stop * audio.sample_rate), 0LL, total);
    if (last <= first) continue;
    const auto count =
        frames_in_span(static_cast<std::size_t>(last - first), set.frame_length, set.hop);
    for (std::size_t i = 0; i < count; ++i) {
      starts.push_back(first + static_cast<long long>(i) * set.hop);
    }
  }

  const auto rows = static_cast<Eigen::Index>(starts.size());
  set.raw.resize(rows, set.frame_length);
  for (Eigen::Index r = 0; r < rows; ++r) {
    set.raw.row(r) = Eigen::Map<const Eigen::RowVectorXd>(
        audio.samples.data() + starts[static_cast<std::size_t>(r)], set.frame_length);
  }
  set.windowed = set.raw * hamming_window(set.frame_length).asDiagonal();
  return set;
}

}  // namespace depsev::audio

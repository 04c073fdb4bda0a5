#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "depsev/types.hpp"

namespace depsev::audio {

struct FrameConfig {
  double window_seconds = 0.025;
  double hop_seconds = 0.010;
};

// Participant-speech frames of one session. Row i of `raw` holds the samples
// of frame i; `windowed` is the same frame multiplied by a Hamming window.
struct FrameSet {
  int sample_rate = 0;
  int frame_length = 0;
  int hop = 0;
  Eigen::MatrixXd raw;
  Eigen::MatrixXd windowed;

  Eigen::Index size() const { return raw.rows(); }
};

// Number of full frames that fit in `span_samples` samples.
std::size_t frames_in_span(std::size_t span_samples, int frame_length, int hop);

Eigen::VectorXd hamming_window(int length);

// Frames taken only from participant turn spans; a frame never crosses a turn
// boundary. Throws ArgumentError for sample rates below 8 kHz and
// EmptyInputError when there is no participant turn.
FrameSet frame_signal(const AudioSignal& audio, std::span<const TurnRecord> turns,
                      const FrameConfig& config = {});

}  // namespace depsev::audio

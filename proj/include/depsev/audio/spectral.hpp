#pragma once

#include <vector>

#include <Eigen/Dense>

#include "depsev/audio/frames.hpp"
#include "depsev/audio/lld.hpp"

namespace depsev::audio {

// FFT length used for a frame: the next power of two >= frame_length.
int spectrum_size(int frame_length);

// One-sided power spectrum |X_k|^2, k = 0..n/2, of a zero-padded frame.
Eigen::VectorXd power_spectrum(const Eigen::Ref<const Eigen::VectorXd>& frame, int fft_size);

// Twelve tracks in this order: band energies 0-250, 0-650, 250-650 and
// 1000-4000 Hz; roll-off 25/50/70/90 %; centroid; flux; max-position;
// min-position. Silent frames yield zeros for every descriptor.
std::vector<LldTrack> spectral_llds(const FrameSet& frames);

}  // namespace depsev::audio

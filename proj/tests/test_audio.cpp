#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "depsev/audio/acoustic_vector.hpp"
#include "depsev/audio/derivatives.hpp"
#include "depsev/audio/frames.hpp"
#include "depsev/audio/functionals.hpp"
#include "depsev/audio/prosody.hpp"
#include "depsev/audio/spectral.hpp"
#include "depsev/audio/voice_quality.hpp"
#include "depsev/error.hpp"
#include "support.hpp"

using namespace depsev;
using namespace depsev::audio;

namespace {

constexpr double kPi = std::numbers::pi;

AudioSignal tone(double f0, double seconds, int sr = 8000, int harmonics = 1) {
  AudioSignal a;
  a.sample_rate = sr;
  const auto n = static_cast<std::size_t>(seconds * sr);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (int h = 1; h <= harmonics; ++h) v += std::sin(2.0 * kPi * h * f0 * i / sr) / h;
    a.samples.push_back(0.3 * v);
  }
  return a;
}

TurnRecord turn(double a, double b, Speaker s = Speaker::Participant) { return {a, b, s, {"x"}}; }

}  // namespace

TEST_CASE("frames stay within participant turns") {
  CHECK(frames_in_span(199, 200, 80) == 0);
  CHECK(frames_in_span(200, 200, 80) == 1);
  CHECK(frames_in_span(2400, 200, 80) == 28);
  const auto audio = tone(150.0, 1.0);
  const std::vector<TurnRecord> turns = {turn(0.1, 0.4), turn(0.4, 0.6, Speaker::Agent), turn(0.6, 0.7)};
  const auto frames = frame_signal(audio, turns);
  CHECK(frames.frame_length == 200);
  CHECK(frames.hop == 80);
  REQUIRE(frames.size() == 28 + 8);
  CHECK(frames.raw(0, 0) == audio.samples[800]);
  CHECK(frames.raw(28, 0) == audio.samples[4800]);
  CHECK(frames.windowed(3, 100) == doctest::Approx(frames.raw(3, 100) * hamming_window(200)[100]));

  AudioSignal low = audio;
  low.sample_rate = 4000;
  CHECK_THROWS_AS(frame_signal(low, turns), ArgumentError);
  const std::vector<TurnRecord> agent_only = {turn(0.1, 0.4, Speaker::Agent)};
  CHECK_THROWS_AS(frame_signal(audio, agent_only), EmptyInputError);
}

TEST_CASE("power spectrum and centroid match a direct DFT") {
  Rng rng(11);
  const Eigen::VectorXd frame = testing::random_vector(rng, 200);
  const int n = spectrum_size(200);
  CHECK(n == 256);
  const auto power = power_spectrum(frame, n);
  REQUIRE(power.size() == n / 2 + 1);
  long double weighted = 0.0L;
  long double total = 0.0L;
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<long double> acc = 0.0L;
    for (int t = 0; t < 200; ++t) {
      acc += static_cast<long double>(frame[t]) *
             std::polar(1.0L, -2.0L * std::numbers::pi_v<long double> * k * t / n);
    }
    const long double p = std::norm(acc);
    CHECK(static_cast<double>(p) == doctest::Approx(power[k]).epsilon(1e-9));
    weighted += p * k * 8000.0L / n;
    total += p;
  }

  FrameSet set;
  set.sample_rate = 8000;
  set.frame_length = 200;
  set.hop = 80;
  set.raw = frame.transpose();
  set.windowed = frame.transpose();
  const auto tracks = spectral_llds(set);
  REQUIRE(tracks.size() == 12);
  CHECK(tracks[8].name == "centroid");
  CHECK(tracks[8].values[0] == doctest::Approx(static_cast<double>(weighted / total)).epsilon(1e-10));
}

TEST_CASE("spectral descriptors on a pure tone") {
  const auto audio = tone(1500.0, 0.5);
  const std::vector<TurnRecord> turns = {turn(0.0, 0.5)};
  const auto tracks = spectral_llds(frame_signal(audio, turns));
  const double bin = 8000.0 / 256.0;
  for (Eigen::Index f = 0; f < tracks[0].values.size(); ++f) {
    CHECK(std::abs(tracks[10].values[f] - 1500.0) <= bin);
    CHECK(tracks[3].values[f] > 50.0 * tracks[0].values[f]);
    CHECK(tracks[4].values[f] <= tracks[5].values[f]);
    CHECK(tracks[5].values[f] <= tracks[6].values[f]);
    CHECK(tracks[6].values[f] <= tracks[7].values[f]);
  }
  CHECK(tracks[9].values[0] == 0.0);
}

TEST_CASE("pitch estimation") {
  for (double f0 : {90.0, 150.0, 220.0, 310.0}) {
    const auto audio = tone(f0, 0.05, 8000, 4);
    const std::span<const double> frame(audio.samples.data(), 200);
    const auto est = estimate_pitch(frame, 8000);
    CHECK(est.voicing > 0.55);
    CHECK(est.f0 == doctest::Approx(f0).epsilon(0.02));
  }
  Rng rng(4);
  std::vector<double> noise(200);
  for (auto& v : noise) v = rng.normal();
  CHECK(estimate_pitch(noise, 8000).f0 == 0.0);
  CHECK(estimate_pitch(std::vector<double>(200, 0.0), 8000).voicing == 0.0);
  CHECK(normalized_autocorrelation(std::vector<double>{1, -1, 1, -1, 1, -1}, 2) == doctest::Approx(1.0));
}

TEST_CASE("perturbation measures from pulses") {
  const std::vector<PitchPulse> pulses = {{0, 1.0}, {50, 0.9}, {102, 1.0}, {150, 0.8}, {201, 1.0}};
  const auto p = perturbation_from_pulses(pulses);
  // periods 50, 52, 48, 51
  const double mean_period = 201.0 / 4.0;
  CHECK(p.jitter_local == doctest::Approx((2.0 + 4.0 + 3.0) / 3.0 / mean_period));
  CHECK(p.jitter_ddp == doctest::Approx((6.0 + 7.0) / 2.0 / mean_period));
  CHECK(p.shimmer_local == doctest::Approx((0.1 + 0.1 + 0.2 + 0.2) / 4.0 / 0.94));
  const std::vector<PitchPulse> two = {{0, 1.0}, {50, 1.0}};
  CHECK(perturbation_from_pulses(two).jitter_local == 0.0);

  const auto clean = tone(125.0, 0.05);
  const auto found = find_pitch_pulses(std::span<const double>(clean.samples.data(), 200), 64.0);
  REQUIRE(found.size() >= 3);
  for (std::size_t i = 1; i < found.size(); ++i) {
    CHECK(found[i].position - found[i - 1].position == doctest::Approx(64.0).epsilon(0.01));
  }
}

TEST_CASE("delta matches the regression formula with replicated edges") {
  Rng rng(8);
  const Eigen::VectorXd x = testing::random_vector(rng, 9);
  const auto d = delta(x);
  const Eigen::Index n = x.size();
  for (Eigen::Index t = 0; t < n; ++t) {
    double acc = 0.0;
    for (int k = 1; k <= 2; ++k) {
      acc += k * (x[std::min<Eigen::Index>(t + k, n - 1)] - x[std::max<Eigen::Index>(t - k, 0)]);
    }
    CHECK(d[t] == doctest::Approx(acc / 10.0).epsilon(1e-14));
  }
  const Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
  CHECK(delta(ramp)[5] == doctest::Approx(1.0));
  CHECK_THROWS_AS(add_derivatives(Eigen::VectorXd::Ones(4)), ArgumentError);
}

TEST_CASE("functionals match long-double oracles") {
  using namespace functional_index;
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.below(60));
    const Eigen::VectorXd x = testing::random_vector(rng, n, -2.0, 3.0);
    const auto f = apply_functionals(x);

    // Normal equations for the linear and quadratic fits.
    long double s[5] = {0, 0, 0, 0, 0};
    long double b[3] = {0, 0, 0};
    for (Eigen::Index i = 0; i < n; ++i) {
      long double tp = 1.0L;
      for (int k = 0; k < 5; ++k) {
        s[k] += tp;
        if (k < 3) b[k] += tp * x[i];
        tp *= i;
      }
    }
    const long double det2 = s[0] * s[2] - s[1] * s[1];
    const long double slope = (s[0] * b[1] - s[1] * b[0]) / det2;
    const long double offset = (b[0] - slope * s[1]) / s[0];
    CHECK(f[kLinSlope] == doctest::Approx(static_cast<double>(slope)).epsilon(1e-10));
    CHECK(f[kLinOffset] == doctest::Approx(static_cast<double>(offset)).epsilon(1e-10));

    // Cramer's rule on [[s4 s3 s2][s3 s2 s1][s2 s1 s0]] (a b c) = (b2 b1 b0).
    auto det3 = [](long double m[3][3]) {
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
             m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    long double a[3][3] = {{s[4], s[3], s[2]}, {s[3], s[2], s[1]}, {s[2], s[1], s[0]}};
    const long double rhs[3] = {b[2], b[1], b[0]};
    const long double d = det3(a);
    long double coef[3];
    for (int c = 0; c < 3; ++c) {
      long double m[3][3];
      for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) m[r][k] = k == c ? rhs[r] : a[r][k];
      }
      coef[c] = det3(m) / d;
    }
    CHECK(f[kQuadA] == doctest::Approx(static_cast<double>(coef[0])).epsilon(1e-7));
    CHECK(f[kQuadB] == doctest::Approx(static_cast<double>(coef[1])).epsilon(1e-7));
    CHECK(f[kQuadC] == doctest::Approx(static_cast<double>(coef[2])).epsilon(1e-7));

    long double mean = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) mean += x[i];
    mean /= n;
    long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L, lin_err = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) {
      const long double c = x[i] - mean;
      m2 += c * c;
      m3 += c * c * c;
      m4 += c * c * c * c;
      const long double r = x[i] - (slope * i + offset);
      lin_err += r * r;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    CHECK(f[kLinError] == doctest::Approx(static_cast<double>(lin_err / n)).epsilon(1e-9));
    CHECK(f[kVariance] == doctest::Approx(static_cast<double>(m2)).epsilon(1e-12));
    CHECK(f[kStdDev] == doctest::Approx(std::sqrt(static_cast<double>(m2))).epsilon(1e-12));
    CHECK(f[kSkewness] == doctest::Approx(static_cast<double>(m3 / std::pow(m2, 1.5L))).epsilon(1e-9));
    CHECK(f[kKurtosis] == doctest::Approx(static_cast<double>(m4 / (m2 * m2))).epsilon(1e-9));
    CHECK(f[kMean] == doctest::Approx(static_cast<double>(mean)).epsilon(1e-12));
    CHECK(f[kRange] == doctest::Approx(x.maxCoeff() - x.minCoeff()));
  }
}

TEST_CASE("functionals on hand-built tracks") {
  using namespace functional_index;
  Eigen::VectorXd x(7);
  x << 0, 3, 0, -1, 4, 0, 1;  // mean 1; peaks at 1 and 4
  const auto f = apply_functionals(x);
  CHECK(f[kMaxPos] == 4.0);
  CHECK(f[kMinPos] == 3.0);
  CHECK(f[kNumPeaks] == 2.0);
  CHECK(f[kMeanPeakDistance] == 3.0);
  CHECK(f[kPeakMean] == 3.5);
  CHECK(f[kNumNonZero] == 4.0);
  // sign changes: 0->-1? no (0 counts as nonnegative); 0->-1 yes, -1->4 yes
  CHECK(f[kZeroCrossingRate] == doctest::Approx(2.0 / 7.0));
  const auto flat = apply_functionals(Eigen::VectorXd::Constant(6, 2.5));
  CHECK(flat[kVariance] == 0.0);
  CHECK(flat[kSkewness] == 0.0);
  CHECK(flat[kKurtosis] == 0.0);
  CHECK(flat[kLinSlope] == doctest::Approx(0.0));
  CHECK_THROWS_AS(apply_functionals(Eigen::VectorXd::Ones(2)), ArgumentError);
}

TEST_CASE("acoustic group dimensions and naming") {
  AudioSignal audio = tone(140.0, 2.0, 8000, 5);
  Rng rng(2);
  for (auto& s : audio.samples) s += 0.01 * rng.normal();
  const auto session = make_session("s1", audio, {turn(0.2, 0.9), turn(1.0, 1.8)}, {}, std::nullopt);
  const auto groups = session_acoustic_groups(session);
  CHECK(groups.s.values.size() == 864);
  CHECK(groups.p.values.size() == 288);
  CHECK(groups.vq.values.size() == 288);
  const auto m = merge_groups(groups.p, groups.s, groups.vq);
  CHECK(m.values.size() == 1440);
  CHECK(group_dimension(AcousticGroup::M) == 1440);
  CHECK(m.names.front().rfind("P_", 0) == 0);
  CHECK(m.names.back().rfind("VQ_", 0) == 0);
  CHECK(std::set<std::string>(m.names.begin(), m.names.end()).size() == 1440);
  CHECK(m.values.allFinite());
  CHECK_THROWS(merge_groups(groups.s, groups.p, groups.vq));
  const auto short_session = make_session("s2", audio, {turn(0.2, 0.24)}, {}, std::nullopt);
  CHECK_THROWS_AS(session_acoustic_vector(short_session, AcousticGroup::P), EmptyInputError);
}

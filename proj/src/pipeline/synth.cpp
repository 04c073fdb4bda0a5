#include "depsev/pipeline/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "depsev/error.hpp"
#include "depsev/io.hpp"
#include "depsev/pipeline/corpus.hpp"
#include "depsev/random.hpp"
#include "depsev/types.hpp"

namespace depsev::pipeline {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const std::array<const char*, 10> kQuestions = {
    "how are you doing today",
    "where are you from originally",
    "what do you do to relax",
    "tell me about your family",
    "what did you study at school",
    "how do you handle conflicts with people",
    "when was the last time you felt really happy",
    "what are you most proud of in your life",
    "how easy is it for you to get a good night's sleep",
    "what advice would you give your younger self",
};

const std::array<const char*, 3> kPdiQuestions = {
    "have you been diagnosed with ptsd",
    "have you ever been diagnosed with depression",
    "have you ever served in the military",
};

const std::array<const char*, 16> kNeutralWords = {
    "i", "think", "it", "was", "my", "the", "work", "family", "and", "really",
    "just", "like", "time", "people", "home", "school"};
const std::array<const char*, 8> kPositiveWords = {"good", "great", "fun", "happy",
                                                   "enjoy", "friends", "love", "excited"};
const std::array<const char*, 8> kNegativeWords = {"tired", "sad", "hard", "alone",
                                                   "hopeless", "worried", "bad", "stressed"};

double milli(double x) { return std::round(x * 1000.0) / 1000.0; }

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& pool) {
  return pool[rng.below(N)];
}

std::string answer_text(Rng& rng, double s) {
  const auto words = 4 + rng.below(8);
  std::string out;
  auto add = [&](const std::string& w) { out += (out.empty() ? "" : " ") + w; };
  for (std::uint64_t i = 0; i < words; ++i) {
    if (rng.bernoulli(0.04 + 0.14 * s)) add(rng.bernoulli(0.5) ? "um" : "uh");
    const double u = rng.uniform();
    if (u < 0.25 * s) {
      add(pick(rng, kNegativeWords));
    } else if (u < 0.25 * s + 0.25 * (1.0 - s)) {
      add(pick(rng, kPositiveWords));
    } else {
      add(pick(rng, kNeutralWords));
    }
  }
  if (rng.bernoulli(0.3 * (1.0 - s))) add("<laughter>");
  if (rng.bernoulli(0.25 * s)) add("<sigh>");
  return out;
}

std::string pdi_answer(Rng& rng, double p_yes) {
  if (rng.bernoulli(0.05)) return "i'm not sure";
  if (rng.bernoulli(p_yes)) return rng.bernoulli(0.5) ? "yes i have" : "yeah";
  return rng.bernoulli(0.5) ? "no i haven't" : "no";
}

struct Utterance {
  TurnRecord turn;
  double f0 = 0.0;
  double amplitude = 0.0;
  double jitter = 0.0;
};

std::vector<Utterance> make_dialogue(Rng& rng, const SynthSpec& spec, double s) {
  std::vector<Utterance> out;
  double t = 0.5;
  const double participant_f0 = 105.0 + 70.0 * (1.0 - s) + rng.normal(0.0, 8.0);
  auto say = [&](Speaker who, const std::string& text, double duration) {
    Utterance u;
    u.turn.start = milli(t);
    u.turn.stop = milli(t + duration);
    u.turn.speaker = who;
    u.turn.tokens = tokenize(text);
    if (who == Speaker::Agent) {
      u.f0 = 210.0;
      u.amplitude = 0.3;
      u.jitter = 0.002;
    } else {
      u.f0 = participant_f0;
      u.amplitude = 0.35 * (1.0 - 0.4 * s);
      u.jitter = 0.004 + 0.012 * s;
    }
    out.push_back(u);
    t = u.turn.stop;
  };
  auto speech_duration = [&](const std::string& text) {
    return 0.3 + 0.28 * static_cast<double>(tokenize(text).size()) + rng.uniform(0.0, 0.3);
  };

  say(Speaker::Agent, "hi i'm ellie thanks for coming in today", 2.0);
  const std::array<int, 3> pdi_slots = {3, 6, 9};
  const std::array<double, 3> p_yes = {0.05 + 0.5 * s, 0.1 + 0.8 * s, 0.15};
  std::size_t next_question = rng.below(kQuestions.size());
  for (int e = 0; e < spec.exchanges; ++e) {
    std::string question;
    std::string answer;
    const auto slot = std::find(pdi_slots.begin(), pdi_slots.end(), e);
    if (slot != pdi_slots.end()) {
      const auto topic = static_cast<std::size_t>(slot - pdi_slots.begin());
      question = kPdiQuestions[topic];
      answer = pdi_answer(rng, p_yes[topic]);
    } else {
      question = kQuestions[next_question];
      next_question = (next_question + 1) % kQuestions.size();
      answer = answer_text(rng, s);
    }
    t += rng.uniform(0.3, 0.8);
    say(Speaker::Agent, question, speech_duration(question));
    t += (0.4 + spec.response_effect * s) * std::exp(rng.normal(0.0, 0.35));
    say(Speaker::Participant, answer, speech_duration(answer));
    if (slot == pdi_slots.end() && rng.bernoulli(0.5)) {
      t += (0.3 + 0.8 * s) * std::exp(rng.normal(0.0, 0.3));
      const auto more = answer_text(rng, s);
      say(Speaker::Participant, more, speech_duration(more));
    }
  }
  t += 0.5;
  say(Speaker::Agent, "thanks for sharing your thoughts with me goodbye", 2.5);
  return out;
}

AudioSignal render_audio(Rng& rng, const SynthSpec& spec, const std::vector<Utterance>& dialogue) {
  AudioSignal audio;
  audio.sample_rate = spec.sample_rate;
  const double sr = spec.sample_rate;
  const auto total = static_cast<std::size_t>(std::ceil((dialogue.back().turn.stop + 0.5) * sr));
  audio.samples.resize(total);
  for (auto& x : audio.samples) x = rng.normal(0.0, 0.002);
  for (const auto& u : dialogue) {
    const auto begin = static_cast<std::size_t>(std::llround(u.turn.start * sr));
    const auto end = std::min(total, static_cast<std::size_t>(std::llround(u.turn.stop * sr)));
    double phase = 0.0;
    double f0 = u.f0;
    double cycle_amp = 1.0;
    const double syllable_rate = 4.0 + rng.uniform(0.0, 1.0);
    for (std::size_t n = begin; n < end; ++n) {
      phase += kTwoPi * f0 / sr;
      if (phase >= kTwoPi) {
        phase -= kTwoPi;
        f0 = u.f0 * (1.0 + rng.normal(0.0, u.jitter));
        cycle_amp = 1.0 + rng.normal(0.0, 2.0 * u.jitter);
      }
      const double local = static_cast<double>(n - begin) / sr;
      const double envelope = 0.35 + 0.65 * std::abs(std::sin(std::numbers::pi * syllable_rate * local));
      // sin(h x) by the Chebyshev recurrence for five harmonics.
      const double s1 = std::sin(phase);
      const double twice_cos = 2.0 * std::cos(phase);
      double prev = 0.0;
      double cur = s1;
      double v = s1;
      for (int h = 2; h <= 5; ++h) {
        const double next = twice_cos * cur - prev;
        prev = cur;
        cur = next;
        v += cur / h;
      }
      audio.samples[n] += u.amplitude * cycle_amp * envelope * v * 0.6;
    }
  }
  for (auto& x : audio.samples) x = std::clamp(x, -1.0, 1.0);
  return audio;
}

LandmarkPoints face_template() {
  Rng rng(0x5eedf00dULL);
  LandmarkPoints p;
  for (int i = 0; i < kNumLandmarks; ++i) {
    const double theta = kTwoPi * i / kNumLandmarks;
    p(i, 0) = std::cos(theta) * (0.8 + rng.uniform(0.0, 0.2));
    p(i, 1) = 1.3 * std::sin(theta) * (0.8 + rng.uniform(0.0, 0.2));
    p(i, 2) = 0.3 * std::cos(2.0 * theta) + rng.normal(0.0, 0.05);
  }
  return p;
}

LandmarkSequence render_landmarks(Rng& rng, const SynthSpec& spec, double s) {
  static const LandmarkPoints base = face_template();
  LandmarkPoints person = base;
  for (int i = 0; i < kNumLandmarks; ++i) {
    for (int a = 0; a < 3; ++a) person(i, a) += rng.normal(0.0, 0.02);
  }
  const double mouth_gain = 0.05 + 0.12 * (1.0 - s);
  const double brow_gain = 0.01 + 0.04 * (1.0 - s);
  const double mouth_period = 5.0 + rng.uniform(0.0, 4.0);
  const double brow_period = 9.0 + rng.uniform(0.0, 6.0);
  const double yaw_period = 20.0 + rng.uniform(0.0, 20.0);
  const double phase = rng.uniform(0.0, kTwoPi);
  LandmarkSequence seq;
  const auto count = static_cast<std::size_t>(spec.landmark_seconds * spec.landmark_fps);
  int failing = 0;
  for (std::size_t k = 0; k < count; ++k) {
    LandmarkFrame f;
    f.timestamp = milli(static_cast<double>(k) / spec.landmark_fps + rng.uniform(-0.02, 0.02));
    if (failing == 0 && rng.bernoulli(spec.tracking_failure_rate)) {
      failing = 1 + static_cast<int>(rng.below(4));
    }
    if (failing > 0) {
      --failing;
      f.success = false;
      f.confidence = 0.0;
      seq.frames.push_back(f);
      continue;
    }
    const double t = f.timestamp;
    LandmarkPoints p = person;
    const double open = mouth_gain * (0.5 + 0.5 * std::sin(kTwoPi * t / mouth_period + phase));
    const double brow = brow_gain * std::sin(kTwoPi * t / brow_period + phase);
    for (int i = 48; i < kNumLandmarks; ++i) p(i, 1) += (i % 2 ? 1.0 : -1.0) * open;
    for (int i = 17; i < 27; ++i) p(i, 1) += brow;
    const double yaw = 0.15 * std::sin(kTwoPi * t / yaw_period + phase);
    const double c = std::cos(yaw);
    const double sn = std::sin(yaw);
    for (int i = 0; i < kNumLandmarks; ++i) {
      const double x = p(i, 0);
      const double z = p(i, 2);
      p(i, 0) = c * x + sn * z;
      p(i, 2) = -sn * x + c * z;
      for (int a = 0; a < 3; ++a) p(i, a) += rng.normal(0.0, 0.0015);
    }
    p *= 60.0;
    p.col(0).array() += 10.0 * std::sin(t / 13.0);
    p.col(2).array() += 500.0;
    f.points = p.unaryExpr(&milli);
    f.success = true;
    f.confidence = 0.93;
    seq.frames.push_back(f);
  }
  // Timestamps must stay strictly increasing after jitter.
  for (std::size_t k = 1; k < seq.frames.size(); ++k) {
    seq.frames[k].timestamp = std::max(seq.frames[k].timestamp, milli(seq.frames[k - 1].timestamp + 1e-3));
  }
  return seq;
}

std::vector<int> draw_scores(Rng& rng, int sessions, int depressed) {
  std::vector<int> flags(static_cast<std::size_t>(sessions), 0);
  std::fill(flags.begin(), flags.begin() + depressed, 1);
  rng.shuffle(std::span<int>(flags));
  std::vector<int> scores;
  for (int f : flags) {
    scores.push_back(f ? kDepressedCutoff + static_cast<int>(rng.below(kMaxPhq - kDepressedCutoff + 1))
                       : static_cast<int>(rng.below(kDepressedCutoff)));
  }
  return scores;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.train_sessions < 1 || spec.dev_sessions < 1) {
    throw ArgumentError("synth: need at least one train and one dev session");
  }
  if (spec.train_depressed < 0 || spec.train_depressed > spec.train_sessions ||
      spec.dev_depressed < 0 || spec.dev_depressed > spec.dev_sessions) {
    throw ArgumentError("synth: depressed counts must lie within the split sizes");
  }
  if (spec.sample_rate < 8000) throw ArgumentError("synth: sample_rate must be >= 8000");
  if (spec.exchanges < 10) throw ArgumentError("synth: need at least 10 exchanges (PDI slots)");
  if (spec.first_id < 0) throw ArgumentError("synth: first_id must be nonnegative");
  if (spec.response_effect < 0.0) throw ArgumentError("synth: response_effect must be >= 0");
  if (spec.landmark_seconds <= 0.0 || spec.landmark_fps <= 0.0) {
    throw ArgumentError("synth: landmark_seconds and landmark_fps must be positive");
  }
  if (spec.tracking_failure_rate < 0.0 || spec.tracking_failure_rate >= 1.0) {
    throw ArgumentError("synth: tracking_failure_rate must be in [0, 1)");
  }
}

void gen_synthetic(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& root) {
  validate(spec);
  Rng master(seed);
  const auto train_scores = draw_scores(master, spec.train_sessions, spec.train_depressed);
  const auto dev_scores = draw_scores(master, spec.dev_sessions, spec.dev_depressed);

  std::vector<SplitEntry> train;
  std::vector<SplitEntry> dev;
  int id = spec.first_id;
  auto emit = [&](int score, std::vector<SplitEntry>& split) {
    const auto name = std::to_string(id++);
    Rng rng(master.next());
    const double s = static_cast<double>(score) / kMaxPhq;
    const auto dialogue = make_dialogue(rng, spec, s);
    std::vector<TurnRecord> turns;
    for (const auto& u : dialogue) turns.push_back(u.turn);
    const auto files = session_files(root, name);
    save_transcript(files.transcript, turns);
    write_wav(files.audio, render_audio(rng, spec, dialogue));
    save_landmarks(files.landmarks, render_landmarks(rng, spec, s));
    split.push_back({name, score});
  };
  for (int score : train_scores) emit(score, train);
  for (int score : dev_scores) emit(score, dev);
  save_split(root / "train_split.csv", train);
  save_split(root / "dev_split.csv", dev);
}

}  // namespace depsev::pipeline

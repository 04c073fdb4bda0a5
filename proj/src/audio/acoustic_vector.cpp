#include "depsev/audio/acoustic_vector.hpp"

#include <set>

#include "depsev/audio/derivatives.hpp"
#include "depsev/audio/functionals.hpp"
#include "depsev/audio/spectral.hpp"
#include "depsev/audio/voice_quality.hpp"
#include "depsev/error.hpp"

namespace depsev::audio {

std::string to_string(AcousticGroup group) {
  switch (group) {
    case AcousticGroup::S: return "S";
    case AcousticGroup::P: return "P";
    case AcousticGroup::VQ: return "VQ";
    case AcousticGroup::M: return "M";
  }
  return "?";
}

AcousticGroup parse_acoustic_group(const std::string& text) {
  if (text == "S") return AcousticGroup::S;
  if (text == "P") return AcousticGroup::P;
  if (text == "VQ") return AcousticGroup::VQ;
  if (text == "M") return AcousticGroup::M;
  throw ArgumentError("unknown acoustic group '" + text + "'");
}

std::size_t group_dimension(AcousticGroup group) {
  switch (group) {
    case AcousticGroup::S: return 12 * 3 * kNumFunctionals;
    case AcousticGroup::P: return 4 * 3 * kNumFunctionals;
    case AcousticGroup::VQ: return 4 * 3 * kNumFunctionals;
    case AcousticGroup::M: return 20 * 3 * kNumFunctionals;
  }
  return 0;
}

std::vector<LldTrack> base_llds(const FrameSet& frames, AcousticGroup group,
                                const PitchConfig& pitch) {
  switch (group) {
    case AcousticGroup::S: return spectral_llds(frames);
    case AcousticGroup::P: return prosodic_llds(frames, pitch);
    case AcousticGroup::VQ: {
      const auto prosody = prosodic_llds(frames, pitch);
      return voice_quality_llds(frames, prosody.front().values);
    }
    case AcousticGroup::M: break;
  }
  throw ArgumentError("base_llds: merged group has no tracks of its own");
}

AcousticVector project_tracks(const std::string& session_id, AcousticGroup group,
                              const std::vector<LldTrack>& base) {
  static const std::array<const char*, 3> kSuffix = {"", "_de", "_dede"};
  AcousticVector out;
  out.session_id = session_id;
  out.group = group;
  out.values.resize(static_cast<Eigen::Index>(base.size() * 3 * kNumFunctionals));
  Eigen::Index offset = 0;
  const std::string prefix = to_string(group) + "_";
  for (const auto& track : base) {
    auto [d1, d2] = add_derivatives(track.values);
    const std::array<const Eigen::VectorXd*, 3> series = {&track.values, &d1, &d2};
    for (int order = 0; order < 3; ++order) {
      out.values.segment<kNumFunctionals>(offset) = apply_functionals(*series[order]);
      offset += kNumFunctionals;
      for (auto name : kFunctionalNames) {
        out.names.push_back(prefix + track.name + kSuffix[order] + "_" + std::string(name));
      }
    }
  }
  return out;
}

namespace {

FrameSet session_frames(const Session& session, const AcousticConfig& config) {
  FrameSet frames = frame_signal(session.audio, session.turns, config.framing);
  if (frames.size() < 5) {
    throw EmptyInputError("session " + session.id + ": only " + std::to_string(frames.size()) +
                          " participant frames");
  }
  return frames;
}

}  // namespace

AcousticVector session_acoustic_vector(const Session& session, AcousticGroup group,
                                       const AcousticConfig& config) {
  if (group == AcousticGroup::M) {
    const auto groups = session_acoustic_groups(session, config);
    return merge_groups(groups.p, groups.s, groups.vq);
  }
  const FrameSet frames = session_frames(session, config);
  return project_tracks(session.id, group, base_llds(frames, group, config.pitch));
}

AcousticGroups session_acoustic_groups(const Session& session, const AcousticConfig& config) {
  const FrameSet frames = session_frames(session, config);
  const auto prosody = prosodic_llds(frames, config.pitch);
  const auto quality = voice_quality_llds(frames, prosody.front().values);
  return {project_tracks(session.id, AcousticGroup::S, spectral_llds(frames)),
          project_tracks(session.id, AcousticGroup::P, prosody),
          project_tracks(session.id, AcousticGroup::VQ, quality)};
}

AcousticVector merge_groups(const AcousticVector& p, const AcousticVector& s,
                            const AcousticVector& vq) {
  if (p.group != AcousticGroup::P || s.group != AcousticGroup::S || vq.group != AcousticGroup::VQ) {
    throw ArgumentError("merge_groups expects the P, S and VQ vectors in that order");
  }
  if (p.session_id != s.session_id || p.session_id != vq.session_id) {
    throw ArgumentError("merge_groups: vectors come from different sessions (" + p.session_id +
                        ", " + s.session_id + ", " + vq.session_id + ")");
  }
  AcousticVector m;
  m.session_id = p.session_id;
  m.group = AcousticGroup::M;
  m.values.resize(p.values.size() + s.values.size() + vq.values.size());
  m.values << p.values, s.values, vq.values;
  m.names = p.names;
  m.names.insert(m.names.end(), s.names.begin(), s.names.end());
  m.names.insert(m.names.end(), vq.names.begin(), vq.names.end());
  return m;
}

}  // namespace depsev::audio

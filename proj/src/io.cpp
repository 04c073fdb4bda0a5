#include "depsev/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "depsev/error.hpp"

namespace depsev {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const auto pos = line.find(sep, begin);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      break;
    }
    fields.push_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
  return fields;
}

std::vector<std::string_view> lines_of(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (begin < content.size()) {
    auto pos = content.find('\n', begin);
    if (pos == std::string_view::npos) pos = content.size();
    auto line = content.substr(begin, pos - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    begin = pos + 1;
  }
  return lines;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(std::string_view text, int& out) {
  text = trim(text);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return !text.empty() && ec == std::errc() && ptr == end;
}

}  // namespace

Session make_session(std::string id, AudioSignal audio, std::vector<TurnRecord> turns,
                     LandmarkSequence landmarks, std::optional<int> label) {
  if (label && (*label < kMinPhq || *label > kMaxPhq)) {
    throw ArgumentError("session " + id + ": PHQ-8 label " + std::to_string(*label) +
                        " outside [0,24]");
  }
  for (const auto& t : turns) {
    if (!(t.stop > t.start)) {
      throw ArgumentError("session " + id + ": turn with stop <= start at " +
                          format_double(t.start));
    }
  }
  std::stable_sort(turns.begin(), turns.end(),
                   [](const TurnRecord& a, const TurnRecord& b) { return a.start < b.start; });
  return Session{std::move(id), std::move(audio), std::move(turns), std::move(landmarks), label};
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(lower(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (c == '<') {
      const auto close = text.find('>', i + 1);
      if (close != std::string_view::npos) {
        flush();
        tokens.push_back(lower(text.substr(i, close - i + 1)));
        i = close + 1;
        continue;
      }
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      current.push_back(c);
    }
    ++i;
  }
  flush();
  return tokens;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

// ---- transcripts ------------------------------------------------------------

std::vector<TurnRecord> parse_transcript(std::string_view content, const std::string& source) {
  const auto lines = lines_of(content);
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  const auto header = split(lines[0], '\t');
  if (header.size() != 4 || trim(header[0]) != "start_time" || trim(header[1]) != "stop_time" ||
      trim(header[2]) != "speaker" || trim(header[3]) != "value") {
    throw ParseError(source, 1, "expected header 'start_time\\tstop_time\\tspeaker\\tvalue'");
  }
  std::vector<TurnRecord> turns;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (trim(lines[i]).empty()) continue;
    auto fields = split(lines[i], '\t');
    if (fields.size() < 3) throw ParseError(source, line_no, "expected 4 tab-separated fields");
    TurnRecord turn;
    if (!parse_number(fields[0], turn.start)) {
      throw ParseError(source, line_no, "non-numeric start_time");
    }
    if (!parse_number(fields[1], turn.stop)) {
      throw ParseError(source, line_no, "non-numeric stop_time");
    }
    if (!(turn.stop > turn.start)) throw ParseError(source, line_no, "stop_time <= start_time");
    const auto speaker = lower(trim(fields[2]));
    if (speaker == "ellie") {
      turn.speaker = Speaker::Agent;
    } else if (speaker == "participant") {
      turn.speaker = Speaker::Participant;
    } else {
      throw ParseError(source, line_no, "unknown speaker '" + std::string(trim(fields[2])) + "'");
    }
    // The value column may itself contain tabs; everything after the third
    // separator belongs to it.
    std::string value;
    for (std::size_t f = 3; f < fields.size(); ++f) {
      if (f > 3) value.push_back(' ');
      value.append(fields[f]);
    }
    turn.tokens = tokenize(value);
    turns.push_back(std::move(turn));
  }
  return turns;
}

std::vector<TurnRecord> load_transcript(const std::filesystem::path& path) {
  return parse_transcript(read_text_file(path), path.string());
}

std::string format_transcript(const std::vector<TurnRecord>& turns) {
  std::string out = "start_time\tstop_time\tspeaker\tvalue\n";
  for (const auto& t : turns) {
    out += format_double(t.start);
    out += '\t';
    out += format_double(t.stop);
    out += t.speaker == Speaker::Agent ? "\tEllie\t" : "\tParticipant\t";
    for (std::size_t i = 0; i < t.tokens.size(); ++i) {
      if (i) out += ' ';
      out += t.tokens[i];
    }
    out += '\n';
  }
  return out;
}

void save_transcript(const std::filesystem::path& path, const std::vector<TurnRecord>& turns) {
  write_text_file(path, format_transcript(turns));
}

// ---- landmarks --------------------------------------------------------------

LandmarkSequence parse_landmarks(std::string_view content, const std::string& source) {
  constexpr std::size_t kColumns = 4 + 3 * kNumLandmarks;
  LandmarkSequence seq;
  const auto lines = lines_of(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], ',');
    double probe = 0.0;
    if (i == 0 && !parse_number(fields[0], probe)) continue;  // header
    if (fields.size() != kColumns) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(kColumns) + " columns, found " +
                           std::to_string(fields.size()));
    }
    LandmarkFrame frame;
    double success = 0.0;
    if (!parse_number(fields[1], frame.timestamp) || !parse_number(fields[2], frame.confidence) ||
        !parse_number(fields[3], success)) {
      throw ParseError(source, line_no, "non-numeric frame header field");
    }
    if (success != 0.0 && success != 1.0) throw ParseError(source, line_no, "success must be 0 or 1");
    frame.success = success == 1.0;
    for (int axis = 0; axis < 3; ++axis) {
      for (int p = 0; p < kNumLandmarks; ++p) {
        if (!parse_number(fields[4 + axis * kNumLandmarks + p], frame.points(p, axis))) {
          throw ParseError(source, line_no, "non-numeric coordinate");
        }
      }
    }
    if (!seq.frames.empty() && !(frame.timestamp > seq.frames.back().timestamp)) {
      throw ParseError(source, line_no, "timestamps must be strictly increasing");
    }
    seq.frames.push_back(frame);
  }
  return seq;
}

LandmarkSequence load_landmarks(const std::filesystem::path& path) {
  return parse_landmarks(read_text_file(path), path.string());
}

void save_landmarks(const std::filesystem::path& path, const LandmarkSequence& sequence) {
  std::string out = "frame,timestamp,confidence,success";
  for (const char* axis : {"X", "Y", "Z"}) {
    for (int p = 0; p < kNumLandmarks; ++p) out += std::string(",") + axis + std::to_string(p);
  }
  out += '\n';
  for (std::size_t i = 0; i < sequence.frames.size(); ++i) {
    const auto& f = sequence.frames[i];
    out += std::to_string(i + 1) + ',' + format_double(f.timestamp) + ',' +
           format_double(f.confidence) + ',' + (f.success ? "1" : "0");
    for (int axis = 0; axis < 3; ++axis) {
      for (int p = 0; p < kNumLandmarks; ++p) {
        out += ',';
        out += format_double(f.points(p, axis));
      }
    }
    out += '\n';
  }
  write_text_file(path, out);
}

// ---- labels -----------------------------------------------------------------

std::vector<LabelRow> load_labels(const std::filesystem::path& path) {
  const auto content = read_text_file(path);
  const auto lines = lines_of(content);
  const std::string source = path.string();
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  const auto header = split(lines[0], ',');
  if (header.size() < 3 || trim(header[0]) != "Participant_ID" ||
      trim(header[1]) != "PHQ8_Binary" || trim(header[2]) != "PHQ8_Score") {
    throw ParseError(source, 1, "expected header 'Participant_ID,PHQ8_Binary,PHQ8_Score'");
  }
  std::vector<LabelRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], ',');
    LabelRow row;
    if (fields.size() < 3 || trim(fields[0]).empty() || !parse_int(fields[1], row.binary) ||
        !parse_int(fields[2], row.score)) {
      throw ParseError(source, i + 1, "malformed label row");
    }
    if (row.score < kMinPhq || row.score > kMaxPhq) {
      throw ParseError(source, i + 1, "PHQ8_Score outside [0,24]");
    }
    row.participant_id = std::string(trim(fields[0]));
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_labels(const std::filesystem::path& path, const std::vector<LabelRow>& rows) {
  std::string out = "Participant_ID,PHQ8_Binary,PHQ8_Score\n";
  for (const auto& r : rows) {
    out += r.participant_id + ',' + std::to_string(r.binary) + ',' + std::to_string(r.score) + '\n';
  }
  write_text_file(path, out);
}

// ---- WAV --------------------------------------------------------------------

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioSignal read_wav(const std::filesystem::path& path) {
  const std::string raw = read_text_file(path);
  const auto* data = reinterpret_cast<const unsigned char*>(raw.data());
  const std::string source = path.string();
  if (raw.size() < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw IoError(source + ": not a RIFF/WAVE file");
  }
  AudioSignal audio;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const std::uint32_t size = read_u32(data + pos + 4);
    const unsigned char* body = data + pos + 8;
    if (pos + 8 + size > raw.size()) throw IoError(source + ": truncated chunk");
    if (std::memcmp(data + pos, "fmt ", 4) == 0) {
      if (size < 16) throw IoError(source + ": short fmt chunk");
      const auto format = read_u16(body);
      const auto channels = read_u16(body + 2);
      const auto bits = read_u16(body + 14);
      if (format != 1 || bits != 16) throw IoError(source + ": only 16-bit PCM is supported");
      if (channels != 1) {
        throw IoError(source + ": expected mono audio, found " + std::to_string(channels) +
                      " channels");
      }
      audio.sample_rate = static_cast<int>(read_u32(body + 4));
      have_fmt = true;
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      if (!have_fmt) throw IoError(source + ": data chunk before fmt chunk");
      audio.samples.resize(size / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(read_u16(body + 2 * i));
        audio.samples[i] = v / 32768.0;
      }
      return audio;
    }
    pos += 8 + size + (size & 1u);
  }
  throw IoError(source + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, const AudioSignal& audio) {
  const auto n = static_cast<std::uint32_t>(audio.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (double s : audio.samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  write_text_file(path, out);
}

}  // namespace depsev

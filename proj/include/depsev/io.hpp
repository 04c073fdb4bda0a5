#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "depsev/types.hpp"

namespace depsev {

// Lowercases and splits on whitespace. Any `<...>` run is one token, kept
// verbatim (including inner spaces) and split off from adjacent text.
std::vector<std::string> tokenize(std::string_view text);

// Transcript TSV with header `start_time stop_time speaker value`.
// Speaker names map case-insensitively: "Ellie" -> Agent, "Participant" -> Participant.
std::vector<TurnRecord> load_transcript(const std::filesystem::path& path);
std::vector<TurnRecord> parse_transcript(std::string_view content,
                                         const std::string& source = "<memory>");
void save_transcript(const std::filesystem::path& path, const std::vector<TurnRecord>& turns);
std::string format_transcript(const std::vector<TurnRecord>& turns);

// Landmark CSV: frame, timestamp, confidence, success, X0..X67, Y0..Y67, Z0..Z67.
// A non-numeric first line is treated as a header.
LandmarkSequence load_landmarks(const std::filesystem::path& path);
LandmarkSequence parse_landmarks(std::string_view content, const std::string& source = "<memory>");
void save_landmarks(const std::filesystem::path& path, const LandmarkSequence& sequence);

struct LabelRow {
  std::string participant_id;
  int binary = 0;
  int score = 0;
};

// `Participant_ID,PHQ8_Binary,PHQ8_Score`; rows kept in file order.
std::vector<LabelRow> load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const std::vector<LabelRow>& rows);

// 16-bit PCM mono WAV. Stereo and other encodings are rejected.
AudioSignal read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioSignal& audio);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace depsev

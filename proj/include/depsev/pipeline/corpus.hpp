#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "depsev/types.hpp"

namespace depsev::pipeline {

// Layout under the corpus root:
//   train_split.csv, dev_split.csv   Participant_ID,PHQ8_Binary,PHQ8_Score
//   sessions/<id>/<id>_AUDIO.wav
//   sessions/<id>/<id>_TRANSCRIPT.csv
//   sessions/<id>/<id>_CLNF_features3D.txt
// Empty PHQ8 fields mark an unlabeled session.

struct SplitEntry {
  std::string id;
  std::optional<int> score;
};

struct Corpus {
  std::filesystem::path root;
  std::vector<SplitEntry> train;
  std::vector<SplitEntry> dev;
  std::vector<SplitEntry> test;  // optional test_split.csv
  bool has_test = false;

  const std::vector<SplitEntry>& split(const std::string& name) const;
};

std::vector<SplitEntry> load_split(const std::filesystem::path& path);
void save_split(const std::filesystem::path& path, const std::vector<SplitEntry>& entries);

Corpus scan_corpus(const std::filesystem::path& root);

struct SessionFiles {
  std::filesystem::path audio;
  std::filesystem::path transcript;
  std::filesystem::path landmarks;
};

SessionFiles session_files(const std::filesystem::path& root, const std::string& id);

}  // namespace depsev::pipeline

#include "depsev/pipeline/corpus.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "depsev/error.hpp"
#include "depsev/io.hpp"

namespace depsev::pipeline {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

const std::vector<SplitEntry>& Corpus::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") {
    if (!has_test) throw ArgumentError("corpus " + root.string() + " has no test_split.csv");
    return test;
  }
  throw ArgumentError("unknown split '" + name + "' (train, dev, test)");
}

std::vector<SplitEntry> load_split(const std::filesystem::path& path) {
  const auto source = path.string();
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty split file");
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "Participant_ID") {
    throw ParseError(source, 1, "first column must be Participant_ID");
  }
  std::ptrdiff_t score_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "PHQ8_Score") score_col = static_cast<std::ptrdiff_t>(c);
  }
  std::vector<SplitEntry> out;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    SplitEntry e;
    e.id = fields.at(0);
    if (e.id.empty()) throw ParseError(source, line_no, "empty participant id");
    if (!seen.insert(e.id).second) throw ParseError(source, line_no, "duplicate id " + e.id);
    if (score_col >= 0 && static_cast<std::size_t>(score_col) < fields.size() &&
        !fields[static_cast<std::size_t>(score_col)].empty()) {
      const auto& f = fields[static_cast<std::size_t>(score_col)];
      int v = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || v < kMinPhq || v > kMaxPhq) {
        throw ParseError(source, line_no, "PHQ8_Score must be an integer in [0, 24]");
      }
      e.score = v;
    }
    out.push_back(std::move(e));
  }
  return out;
}

void save_split(const std::filesystem::path& path, const std::vector<SplitEntry>& entries) {
  std::string out = "Participant_ID,PHQ8_Binary,PHQ8_Score\n";
  for (const auto& e : entries) {
    out += e.id + ',';
    if (e.score) out += std::to_string(is_depressed(*e.score) ? 1 : 0) + ',' + std::to_string(*e.score);
    else out += ',';
    out += '\n';
  }
  write_text_file(path, out);
}

Corpus scan_corpus(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw IoError("corpus root " + root.string() + " is not a directory");
  }
  Corpus c;
  c.root = root;
  c.train = load_split(root / "train_split.csv");
  c.dev = load_split(root / "dev_split.csv");
  if (std::filesystem::exists(root / "test_split.csv")) {
    c.test = load_split(root / "test_split.csv");
    c.has_test = true;
  }
  return c;
}

SessionFiles session_files(const std::filesystem::path& root, const std::string& id) {
  const auto dir = root / "sessions" / id;
  return {dir / (id + "_AUDIO.wav"), dir / (id + "_TRANSCRIPT.csv"),
          dir / (id + "_CLNF_features3D.txt")};
}

}  // namespace depsev::pipeline

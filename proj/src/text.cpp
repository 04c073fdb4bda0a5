#include "depsev/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "depsev/error.hpp"
#include "depsev/io.hpp"

namespace depsev::text {

Document build_document(std::span<const TurnRecord> turns) {
  Document doc;
  for (const auto& turn : turns) {
    if (turn.speaker != Speaker::Participant) continue;
    for (const auto& token : turn.tokens) {
      std::string lowered = token;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      doc.push_back(std::move(lowered));
    }
  }
  return doc;
}

Vocabulary Vocabulary::build(std::span<const Document> training_docs) {
  std::set<std::string> unique;
  for (const auto& doc : training_docs) unique.insert(doc.begin(), doc.end());
  return from_tokens({unique.begin(), unique.end()});
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<Eigen::Index>(i)).second) {
      throw ArgumentError("duplicate vocabulary token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

Eigen::Index Vocabulary::index(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

std::string to_string(Weighting mode) { return mode == Weighting::Bool ? "BOOL" : "TFIDF"; }

Weighting parse_weighting(const std::string& text) {
  if (text == "BOOL") return Weighting::Bool;
  if (text == "TFIDF") return Weighting::TfIdf;
  throw ArgumentError("unknown text weighting '" + text + "'");
}

TextModel fit_text_model(std::span<const Document> training_docs) {
  TextModel model;
  model.vocabulary = Vocabulary::build(training_docs);
  model.training_docs = training_docs.size();
  Eigen::VectorXd df = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.vocabulary.size()));
  for (const auto& doc : training_docs) {
    std::set<Eigen::Index> present;
    for (const auto& token : doc) present.insert(model.vocabulary.index(token));
    for (auto i : present) df[i] += 1.0;
  }
  const double n = static_cast<double>(training_docs.size());
  model.idf = df.unaryExpr([n](double d) { return std::log(n / d) + 1.0; });
  return model;
}

Eigen::MatrixXd vectorize(std::span<const Document> docs, const TextModel& model, Weighting mode) {
  if (model.vocabulary.empty()) throw ArgumentError("vectorize: empty vocabulary");
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()),
                            static_cast<Eigen::Index>(model.vocabulary.size()));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto row = static_cast<Eigen::Index>(d);
    for (const auto& token : docs[d]) {
      const auto j = model.vocabulary.index(token);
      if (j < 0) continue;
      if (mode == Weighting::Bool) {
        out(row, j) = 1.0;
      } else {
        out(row, j) += 1.0;
      }
    }
    if (mode == Weighting::TfIdf) out.row(row).array() *= model.idf.transpose().array();
  }
  return out;
}

void save_text_model(const std::filesystem::path& path, const TextModel& model) {
  std::string out = "depsev-text-model 1\n";
  out += "docs " + std::to_string(model.training_docs) + "\n";
  out += "terms " + std::to_string(model.vocabulary.size()) + "\n";
  for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
    out += model.vocabulary.tokens()[i] + '\t' +
           format_double(model.idf[static_cast<Eigen::Index>(i)]) + '\n';
  }
  write_text_file(path, out);
}

TextModel load_text_model(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string magic;
  int version = 0;
  std::string key;
  std::size_t docs = 0;
  std::size_t terms = 0;
  in >> magic >> version;
  if (magic != "depsev-text-model" || version != 1) {
    throw IoError(path.string() + ": not a version-1 text model");
  }
  in >> key >> docs >> key >> terms;
  std::string line;
  std::getline(in, line);
  std::vector<std::string> tokens;
  Eigen::VectorXd idf(static_cast<Eigen::Index>(terms));
  for (std::size_t i = 0; i < terms; ++i) {
    if (!std::getline(in, line)) throw IoError(path.string() + ": truncated text model");
    const auto tab = line.rfind('\t');
    tokens.push_back(line.substr(0, tab));
    idf[static_cast<Eigen::Index>(i)] = std::stod(line.substr(tab + 1));
  }
  TextModel model;
  model.vocabulary = Vocabulary::from_tokens(std::move(tokens));
  model.idf = idf;
  model.training_docs = docs;
  return model;
}

void EmbeddingTable::add(const std::string& token, const Eigen::Ref<const Eigen::VectorXd>& vector) {
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_) {
    throw ArgumentError("embedding for '" + token + "' has dimension " +
                        std::to_string(vector.size()) + ", expected " + std::to_string(dimension_));
  }
  vectors_[token] = vector;
}

const Eigen::VectorXd* EmbeddingTable::find(const std::string& token) const {
  const auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable parse_embeddings(std::string_view content) {
  EmbeddingTable table;
  std::size_t line_no = 0;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("<embeddings>", line_no, "non-numeric component '" + field + "'");
      }
      values.push_back(v);
    }
    if (values.empty()) throw ParseError("<embeddings>", line_no, "token without a vector");
    if (table.dimension() != 0 && static_cast<Eigen::Index>(values.size()) != table.dimension()) {
      throw ParseError("<embeddings>", line_no, "dimension mismatch");
    }
    table.add(token, Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                       static_cast<Eigen::Index>(values.size())));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_text_file(path));
}

Eigen::VectorXd embed_average(const Document& doc, const EmbeddingTable& table) {
  if (table.empty()) throw ArgumentError("embed_average: empty embedding table");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dimension());
  int found = 0;
  for (const auto& token : doc) {
    if (const auto* v = table.find(token)) {
      sum += *v;
      ++found;
    }
  }
  return found > 0 ? Eigen::VectorXd(sum / found) : sum;
}

}  // namespace depsev::text

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "depsev/types.hpp"

namespace depsev::text {

using Document = std::vector<std::string>;

// Participant tokens of all turns, in order, lowercased.
Document build_document(std::span<const TurnRecord> turns);

class Vocabulary {
 public:
  Vocabulary() = default;
  // Sorted unique tokens of the training documents.
  static Vocabulary build(std::span<const Document> training_docs);
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  // Index of `token`, or -1 when out of vocabulary.
  Eigen::Index index(const std::string& token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

enum class Weighting { Bool, TfIdf };

std::string to_string(Weighting mode);
Weighting parse_weighting(const std::string& text);

// Vocabulary plus training idf: idf(t) = ln(n_docs / df(t)) + 1.
struct TextModel {
  Vocabulary vocabulary;
  Eigen::VectorXd idf;
  std::size_t training_docs = 0;
};

TextModel fit_text_model(std::span<const Document> training_docs);

// One row per document. Out-of-vocabulary tokens are ignored; TFIDF uses raw
// counts times the training idf, without length normalization.
Eigen::MatrixXd vectorize(std::span<const Document> docs, const TextModel& model, Weighting mode);

void save_text_model(const std::filesystem::path& path, const TextModel& model);
TextModel load_text_model(const std::filesystem::path& path);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(Eigen::Index dimension) : dimension_(dimension) {}

  void add(const std::string& token, const Eigen::Ref<const Eigen::VectorXd>& vector);
  const Eigen::VectorXd* find(const std::string& token) const;
  Eigen::Index dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }

 private:
  Eigen::Index dimension_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

// Text format: one `token v1 ... vd` per line; d taken from the first line.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::string_view content);

// Mean of the vectors of tokens present in the table; zero vector when none is.
Eigen::VectorXd embed_average(const Document& doc, const EmbeddingTable& table);

}  // namespace depsev::text

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "depsev/models/lstm.hpp"
#include "depsev/models/reptree.hpp"
#include "depsev/models/svr.hpp"

namespace depsev::models {

// Predicts the training-label mean for every input.
struct MeanModel {
  double mean = 0.0;
  Eigen::Index input_dim = 0;
};

MeanModel mean_train(const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Index input_dim);

using AnyModel = std::variant<MeanModel, SvrModel, RepTreeModel, LstmModel>;

std::string model_kind(const AnyModel& model);

// A trained model together with the feature columns it consumes, in order.
struct StoredModel {
  AnyModel model;
  std::vector<std::string> columns;
  // Free-form provenance; keys and values must not contain whitespace.
  std::vector<std::pair<std::string, std::string>> metadata;

  const std::string* meta(const std::string& key) const;
};

inline constexpr int kModelFormatVersion = 1;

std::string format_model(const StoredModel& stored);
StoredModel parse_model(std::string_view content, const std::string& source = "<memory>");
void save_model(const std::filesystem::path& path, const StoredModel& stored);
StoredModel load_model(const std::filesystem::path& path);

// Row-wise prediction for the tabular kinds; LstmModel is rejected here.
Eigen::VectorXd predict_rows(const AnyModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows);

}  // namespace depsev::models

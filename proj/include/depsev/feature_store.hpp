#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace depsev {

// Named feature matrix: one row per session (or window), one column per feature.
struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  // Row index of `id`, or -1.
  Eigen::Index find(const std::string& id) const;
  void append(const std::string& id, const Eigen::Ref<const Eigen::RowVectorXd>& row);
  FeatureTable select_rows(const std::vector<std::string>& wanted) const;
  FeatureTable select_columns(const std::vector<Eigen::Index>& columns) const;
};

// CSV with header `session_id,<names...>`; values written round-trip exact.
void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::filesystem::path& path);

}  // namespace depsev

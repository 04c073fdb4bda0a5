#include "depsev/feature_store.hpp"

#include <charconv>
#include <limits>
#include <sstream>

#include "depsev/error.hpp"
#include "depsev/io.hpp"

namespace depsev {

Eigen::Index FeatureTable::find(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

void FeatureTable::append(const std::string& id, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (values.size() == 0 && ids.empty()) values.resize(0, row.size());
  if (row.size() != values.cols()) {
    throw ArgumentError("feature row for " + id + " has " + std::to_string(row.size()) +
                        " columns, table has " + std::to_string(values.cols()));
  }
  values.conservativeResize(values.rows() + 1, Eigen::NoChange);
  values.row(values.rows() - 1) = row;
  ids.push_back(id);
}

FeatureTable FeatureTable::select_rows(const std::vector<std::string>& wanted) const {
  FeatureTable out;
  out.names = names;
  out.values.resize(static_cast<Eigen::Index>(wanted.size()), values.cols());
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    const auto r = find(wanted[i]);
    if (r < 0) throw ArgumentError("no feature row for session " + wanted[i]);
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(r);
    out.ids.push_back(wanted[i]);
  }
  return out;
}

FeatureTable FeatureTable::select_columns(const std::vector<Eigen::Index>& columns) const {
  FeatureTable out;
  out.ids = ids;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.values.col(static_cast<Eigen::Index>(j)) = values.col(columns[j]);
    out.names.push_back(names[static_cast<std::size_t>(columns[j])]);
  }
  return out;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table) {
  std::string out = "session_id";
  for (const auto& n : table.names) out += ',' + n;
  out += '\n';
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    out += table.ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
      out += ',';
      out += format_double(table.values(r, c));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty feature file");
  FeatureTable table;
  {
    std::istringstream header(line);
    std::string field;
    std::getline(header, field, ',');
    if (field != "session_id") throw ParseError(path.string(), 1, "expected session_id column");
    while (std::getline(header, field, ',')) table.names.push_back(field);
  }
  const auto cols = static_cast<Eigen::Index>(table.names.size());
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    table.ids.push_back(field);
    Eigen::Index count = 0;
    while (std::getline(row, field, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        // from_chars rejects "nan"/"inf" spellings from some writers; accept them.
        if (field == "nan" || field == "-nan") {
          v = std::numeric_limits<double>::quiet_NaN();
        } else {
          throw ParseError(path.string(), line_no, "non-numeric feature value '" + field + "'");
        }
      }
      flat.push_back(v);
      ++count;
    }
    if (count != cols) throw ParseError(path.string(), line_no, "column count mismatch");
  }
  table.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), static_cast<Eigen::Index>(table.ids.size()), cols);
  return table;
}

}  // namespace depsev

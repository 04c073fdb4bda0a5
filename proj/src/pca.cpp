#include "depsev/pca.hpp"

#include <sstream>

#include "depsev/error.hpp"
#include "depsev/io.hpp"

namespace depsev {

Eigen::VectorXd PcaProjection::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != mean.size()) {
    throw ArgumentError("PCA input has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(mean.size()));
  }
  return components * (x - mean);
}

Eigen::MatrixXd PcaProjection::project_rows(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
  if (rows.cols() != mean.size()) throw ArgumentError("PCA input dimension mismatch");
  return (rows.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::MatrixXd PcaProjection::reconstruct_rows(const Eigen::Ref<const Eigen::MatrixXd>& scores) const {
  return (scores * components).rowwise() + mean.transpose();
}

namespace {

PcaProjection finish_pca(PcaProjection pca, const Eigen::VectorXd& values,
                         const Eigen::MatrixXd& vectors, double variance_keep) {
  const Eigen::Index d = pca.mean.size();
  const double total = values.sum();
  if (!(total > 0.0)) throw NumericError("PCA on zero-variance data");

  Eigen::Index q = 0;
  double cumulative = 0.0;
  while (q < values.size()) {
    cumulative += values[q];
    ++q;
    if (cumulative / total >= variance_keep) break;
  }
  pca.eigenvalues = values;
  pca.explained_ratio = cumulative / total;
  pca.components.resize(q, d);
  for (Eigen::Index k = 0; k < q; ++k) {
    Eigen::VectorXd v = vectors.col(k);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v[pivot] < 0.0) v = -v;
    pca.components.row(k) = v.transpose();
  }
  return pca;
}

}  // namespace


PcaProjection fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& rows, double variance_keep) {
  if (rows.rows() < 2) throw ArgumentError("PCA needs at least two rows");
  if (!(variance_keep > 0.0 && variance_keep <= 1.0)) {
    throw ArgumentError("variance_keep must lie in (0, 1]");
  }
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  PcaProjection pca;
  pca.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - pca.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns in input space, matching `values`
  if (n < d) {
    const Eigen::MatrixXd gram = centered * centered.transpose() / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw NumericError("PCA eigen-solve failed");
    values = solver.eigenvalues().reverse().cwiseMax(0.0);
    const Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse();
    vectors = Eigen::MatrixXd::Zero(d, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (values[k] > 0.0) {
        vectors.col(k) = centered.transpose() * u.col(k) / std::sqrt(denom * values[k]);
      }
    }
  } else {
    const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericError("PCA eigen-solve failed");
    values = solver.eigenvalues().reverse().cwiseMax(0.0);
    vectors = solver.eigenvectors().rowwise().reverse();
  }

  return finish_pca(std::move(pca), values, vectors, variance_keep);
}

namespace {

void append_row(std::string& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (i) out += ' ';
    out += format_double(row[i]);
  }
  out += '\n';
}

Eigen::RowVectorXd read_row(std::istream& in, Eigen::Index size, const std::string& source) {
  Eigen::RowVectorXd row(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    if (!(in >> row[i])) throw IoError(source + ": truncated PCA model");
  }
  return row;
}

}  // namespace

void PcaAccumulator::add(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  if (rows.rows() == 0) return;
  if (count_ == 0 && shift_.size() == 0) {
    shift_ = rows.row(0).transpose();
    sum_ = Eigen::VectorXd::Zero(rows.cols());
    scatter_ = Eigen::MatrixXd::Zero(rows.cols(), rows.cols());
  }
  if (rows.cols() != shift_.size()) throw ArgumentError("PCA accumulator dimension mismatch");
  const Eigen::MatrixXd shifted = rows.rowwise() - shift_.transpose();
  sum_ += shifted.colwise().sum().transpose();
  scatter_.selfadjointView<Eigen::Lower>().rankUpdate(shifted.transpose());
  count_ += rows.rows();
}

PcaProjection PcaAccumulator::fit(double variance_keep) const {
  if (count_ < 2) throw ArgumentError("PCA needs at least two rows");
  if (!(variance_keep > 0.0 && variance_keep <= 1.0)) {
    throw ArgumentError("variance_keep must lie in (0, 1]");
  }
  const double n = static_cast<double>(count_);
  const Eigen::VectorXd centered_mean = sum_ / n;
  Eigen::MatrixXd cov = scatter_.selfadjointView<Eigen::Lower>();
  cov -= n * centered_mean * centered_mean.transpose();
  cov /= n - 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("PCA eigen-solve failed");
  PcaProjection pca;
  pca.mean = shift_ + centered_mean;
  const Eigen::VectorXd values = solver.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  return finish_pca(std::move(pca), values, vectors, variance_keep);
}

void save_pca(const std::filesystem::path& path, const PcaProjection& pca) {
  std::string out = "depsev-pca 1\n";
  out += "input_dim " + std::to_string(pca.input_dim()) + "\n";
  out += "components " + std::to_string(pca.dim()) + "\n";
  out += "eigenvalues " + std::to_string(pca.eigenvalues.size()) + "\n";
  out += "explained " + format_double(pca.explained_ratio) + "\n";
  append_row(out, pca.mean.transpose());
  append_row(out, pca.eigenvalues.transpose());
  for (Eigen::Index k = 0; k < pca.dim(); ++k) append_row(out, pca.components.row(k));
  write_text_file(path, out);
}

PcaProjection load_pca(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  const std::string source = path.string();
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "depsev-pca" || version != 1) throw IoError(source + ": not a version-1 PCA model");
  std::string key;
  Eigen::Index d = 0;
  Eigen::Index q = 0;
  Eigen::Index m = 0;
  PcaProjection pca;
  in >> key >> d >> key >> q >> key >> m >> key >> pca.explained_ratio;
  if (!in || d <= 0 || q <= 0) throw IoError(source + ": malformed PCA header");
  pca.mean = read_row(in, d, source).transpose();
  pca.eigenvalues = read_row(in, m, source).transpose();
  pca.components.resize(q, d);
  for (Eigen::Index k = 0; k < q; ++k) pca.components.row(k) = read_row(in, d, source);
  return pca;
}

}  // namespace depsev

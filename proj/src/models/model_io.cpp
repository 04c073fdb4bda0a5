#include "depsev/models/model_io.hpp"

#include <charconv>
#include <sstream>

#include "depsev/error.hpp"
#include "depsev/io.hpp"

namespace depsev::models {

MeanModel mean_train(const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Index input_dim) {
  if (y.size() < 1) throw ArgumentError("mean model needs at least one target");
  return {y.mean(), input_dim};
}

std::string model_kind(const AnyModel& model) {
  struct {
    std::string operator()(const MeanModel&) const { return "mean"; }
    std::string operator()(const SvrModel&) const { return "svr"; }
    std::string operator()(const RepTreeModel&) const { return "reptree"; }
    std::string operator()(const LstmModel&) const { return "lstm"; }
  } visitor;
  return std::visit(visitor, model);
}

namespace {

class Writer {
 public:
  void scalar(const std::string& key, double v) { out_ << key << ' ' << format_double(v) << '\n'; }
  void integer(const std::string& key, long long v) { out_ << key << ' ' << v << '\n'; }
  void word(const std::string& key, const std::string& v) { out_ << key << ' ' << v << '\n'; }

  void vector(const std::string& key, const Eigen::Ref<const Eigen::VectorXd>& v) {
    out_ << key << ' ' << v.size();
    for (Eigen::Index i = 0; i < v.size(); ++i) out_ << ' ' << format_double(v[i]);
    out_ << '\n';
  }

  void matrix(const std::string& key, const Eigen::Ref<const Eigen::MatrixXd>& m) {
    out_ << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out_ << ' ';
        out_ << format_double(m(r, c));
      }
      out_ << '\n';
    }
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

class Reader {
 public:
  Reader(std::string_view content, std::string source) : source_(std::move(source)) {
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < content.size()) {
      if (content[i] == '\n') {
        ++line;
        ++i;
      } else if (content[i] == ' ' || content[i] == '\t' || content[i] == '\r') {
        ++i;
      } else {
        const auto begin = i;
        while (i < content.size() && content[i] != ' ' && content[i] != '\n' &&
               content[i] != '\t' && content[i] != '\r') {
          ++i;
        }
        tokens_.emplace_back(std::string(content.substr(begin, i - begin)), line);
      }
    }
  }

  std::string next() {
    if (pos_ >= tokens_.size()) fail("unexpected end of model file");
    return tokens_[pos_++].first;
  }

  void expect(const std::string& key) {
    const auto line = current_line();
    const auto got = next();
    if (got != key) throw ParseError(source_, line, "expected '" + key + "', found '" + got + "'");
  }

  double number() {
    const auto line = current_line();
    const auto text = next();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ParseError(source_, line, "not a number: '" + text + "'");
    }
    return v;
  }

  long long integer() {
    const auto line = current_line();
    const auto text = next();
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ParseError(source_, line, "not an integer: '" + text + "'");
    }
    return v;
  }

  double scalar(const std::string& key) {
    expect(key);
    return number();
  }
  long long integer(const std::string& key) {
    expect(key);
    return integer();
  }
  std::string word(const std::string& key) {
    expect(key);
    return next();
  }

  Eigen::VectorXd vector(const std::string& key) {
    expect(key);
    const auto n = count();
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = number();
    return v;
  }

  Eigen::MatrixXd matrix(const std::string& key) {
    expect(key);
    const auto rows = count();
    const auto cols = count();
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number();
    }
    return m;
  }

  void finish() {
    if (pos_ != tokens_.size()) fail("trailing content after model");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, current_line(), what);
  }

 private:
  Eigen::Index count() {
    const auto v = integer();
    if (v < 0) fail("negative size");
    return static_cast<Eigen::Index>(v);
  }

  std::size_t current_line() const {
    if (tokens_.empty()) return 1;
    return tokens_[std::min(pos_, tokens_.size() - 1)].second;
  }

  std::string source_;
  std::vector<std::pair<std::string, std::size_t>> tokens_;
  std::size_t pos_ = 0;
};

void write_body(Writer& w, const MeanModel& m) {
  w.integer("input_dim", m.input_dim);
  w.scalar("mean", m.mean);
}

void write_body(Writer& w, const SvrModel& m) {
  w.word("kernel", to_string(m.config.kernel));
  w.scalar("c", m.config.c);
  w.scalar("gamma", m.config.gamma);
  w.scalar("epsilon", m.config.epsilon);
  w.scalar("tolerance", m.config.tolerance);
  w.integer("max_iterations", m.config.max_iterations);
  w.integer("iterations", m.iterations);
  w.vector("scaler_min", m.scaler.min);
  w.vector("scaler_range", m.scaler.range);
  w.scalar("bias", m.bias);
  w.vector("alpha", m.alpha);
  w.vector("alpha_star", m.alpha_star);
  w.matrix("training_rows", m.training_rows);
}

void write_body(Writer& w, const RepTreeModel& m) {
  w.integer("min_leaf", m.config.min_leaf);
  w.scalar("prune_fraction", m.config.prune_fraction);
  w.scalar("min_variance_prop", m.config.min_variance_prop);
  w.integer("max_depth", m.config.max_depth);
  w.integer("prune", m.config.prune ? 1 : 0);
  w.integer("seed", static_cast<long long>(m.seed));
  w.integer("input_dim", m.input_dim);
  w.scalar("pruning_sse_before", m.pruning_sse_before);
  w.scalar("pruning_sse_after", m.pruning_sse_after);
  w.integer("nodes", static_cast<long long>(m.nodes.size()));
  for (const auto& n : m.nodes) {
    w.word("node", std::to_string(n.feature) + ' ' + format_double(n.threshold) + ' ' +
                       format_double(n.value) + ' ' + std::to_string(n.left) + ' ' +
                       std::to_string(n.right) + ' ' + std::to_string(n.growing_count));
  }
}

void write_body(Writer& w, const LstmModel& m) {
  const auto& c = m.config;
  w.integer("hidden", c.hidden);
  w.scalar("dropout", c.dropout);
  w.scalar("learning_rate", c.learning_rate);
  w.integer("batch_size", c.batch_size);
  w.scalar("clip_norm", c.clip_norm);
  w.integer("epochs", c.epochs);
  w.scalar("bn_momentum", c.bn_momentum);
  w.scalar("bn_epsilon", c.bn_epsilon);
  w.scalar("adam_beta1", c.adam_beta1);
  w.scalar("adam_beta2", c.adam_beta2);
  w.scalar("adam_epsilon", c.adam_epsilon);
  w.integer("seed", static_cast<long long>(c.seed));
  w.integer("input_dim", m.input_dim);
  w.integer("best_epoch", m.best_epoch);
  w.vector("train_loss", Eigen::Map<const Eigen::VectorXd>(m.train_loss.data(),
                                                            static_cast<Eigen::Index>(m.train_loss.size())));
  w.vector("validation_loss",
           Eigen::Map<const Eigen::VectorXd>(m.validation_loss.data(),
                                             static_cast<Eigen::Index>(m.validation_loss.size())));
  for (int l = 0; l < 2; ++l) {
    const auto prefix = "layer" + std::to_string(l + 1) + "_";
    w.matrix(prefix + "w_input", m.params.layers[l].w_input);
    w.matrix(prefix + "w_recurrent", m.params.layers[l].w_recurrent);
    w.vector(prefix + "bias", m.params.layers[l].bias);
  }
  w.vector("bn_gamma", m.params.bn_gamma);
  w.vector("bn_beta", m.params.bn_beta);
  w.vector("running_mean", m.running_mean);
  w.vector("running_var", m.running_var);
  w.vector("head_weights", m.params.head_weights);
  w.scalar("head_bias", m.params.head_bias);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

AnyModel read_body(Reader& r, const std::string& kind) {
  if (kind == "mean") {
    MeanModel m;
    m.input_dim = static_cast<Eigen::Index>(r.integer("input_dim"));
    m.mean = r.scalar("mean");
    return m;
  }
  if (kind == "svr") {
    SvrModel m;
    m.config.kernel = parse_kernel(r.word("kernel"));
    m.config.c = r.scalar("c");
    m.config.gamma = r.scalar("gamma");
    m.config.epsilon = r.scalar("epsilon");
    m.config.tolerance = r.scalar("tolerance");
    m.config.max_iterations = static_cast<long>(r.integer("max_iterations"));
    m.iterations = static_cast<long>(r.integer("iterations"));
    m.scaler.min = r.vector("scaler_min");
    m.scaler.range = r.vector("scaler_range");
    m.bias = r.scalar("bias");
    m.alpha = r.vector("alpha");
    m.alpha_star = r.vector("alpha_star");
    m.training_rows = r.matrix("training_rows");
    if (m.alpha.size() != m.training_rows.rows() || m.alpha_star.size() != m.alpha.size() ||
        m.scaler.range.size() != m.scaler.min.size() ||
        m.training_rows.cols() != m.scaler.min.size()) {
      r.fail("inconsistent SVR shapes");
    }
    return m;
  }
  if (kind == "reptree") {
    RepTreeModel m;
    m.config.min_leaf = static_cast<int>(r.integer("min_leaf"));
    m.config.prune_fraction = r.scalar("prune_fraction");
    m.config.min_variance_prop = r.scalar("min_variance_prop");
    m.config.max_depth = static_cast<int>(r.integer("max_depth"));
    m.config.prune = r.integer("prune") != 0;
    m.seed = static_cast<std::uint64_t>(r.integer("seed"));
    m.input_dim = static_cast<Eigen::Index>(r.integer("input_dim"));
    m.pruning_sse_before = r.scalar("pruning_sse_before");
    m.pruning_sse_after = r.scalar("pruning_sse_after");
    const auto count = r.integer("nodes");
    if (count < 1) r.fail("tree has no nodes");
    for (long long i = 0; i < count; ++i) {
      r.expect("node");
      RepTreeNode n;
      n.feature = static_cast<int>(r.integer());
      n.threshold = r.number();
      n.value = r.number();
      n.left = static_cast<int>(r.integer());
      n.right = static_cast<int>(r.integer());
      n.growing_count = static_cast<int>(r.integer());
      const bool leaf = n.feature < 0;
      if (n.feature >= m.input_dim ||
          (!leaf && (n.left <= i || n.right <= i || n.left >= count || n.right >= count))) {
        r.fail("invalid tree node " + std::to_string(i));
      }
      m.nodes.push_back(n);
    }
    return m;
  }
  if (kind == "lstm") {
    LstmModel m;
    auto& c = m.config;
    c.hidden = static_cast<int>(r.integer("hidden"));
    c.dropout = r.scalar("dropout");
    c.learning_rate = r.scalar("learning_rate");
    c.batch_size = static_cast<int>(r.integer("batch_size"));
    c.clip_norm = r.scalar("clip_norm");
    c.epochs = static_cast<int>(r.integer("epochs"));
    c.bn_momentum = r.scalar("bn_momentum");
    c.bn_epsilon = r.scalar("bn_epsilon");
    c.adam_beta1 = r.scalar("adam_beta1");
    c.adam_beta2 = r.scalar("adam_beta2");
    c.adam_epsilon = r.scalar("adam_epsilon");
    c.seed = static_cast<std::uint64_t>(r.integer("seed"));
    m.input_dim = static_cast<Eigen::Index>(r.integer("input_dim"));
    m.best_epoch = static_cast<int>(r.integer("best_epoch"));
    m.train_loss = to_std(r.vector("train_loss"));
    m.validation_loss = to_std(r.vector("validation_loss"));
    for (int l = 0; l < 2; ++l) {
      const auto prefix = "layer" + std::to_string(l + 1) + "_";
      m.params.layers[l].w_input = r.matrix(prefix + "w_input");
      m.params.layers[l].w_recurrent = r.matrix(prefix + "w_recurrent");
      m.params.layers[l].bias = r.vector(prefix + "bias");
    }
    m.params.bn_gamma = r.vector("bn_gamma");
    m.params.bn_beta = r.vector("bn_beta");
    m.running_mean = r.vector("running_mean");
    m.running_var = r.vector("running_var");
    m.params.head_weights = r.vector("head_weights");
    m.params.head_bias = r.scalar("head_bias");
    const Eigen::Index h = c.hidden;
    const bool ok = m.params.layers[0].w_input.rows() == 4 * h &&
                    m.params.layers[0].w_input.cols() == m.input_dim &&
                    m.params.layers[1].w_input.rows() == 4 * h &&
                    m.params.layers[1].w_input.cols() == h &&
                    m.params.layers[0].w_recurrent.rows() == 4 * h &&
                    m.params.layers[0].w_recurrent.cols() == h &&
                    m.params.layers[1].w_recurrent.rows() == 4 * h &&
                    m.params.layers[1].w_recurrent.cols() == h &&
                    m.params.layers[0].bias.size() == 4 * h &&
                    m.params.layers[1].bias.size() == 4 * h && m.params.bn_gamma.size() == h &&
                    m.params.bn_beta.size() == h && m.running_mean.size() == h &&
                    m.running_var.size() == h && m.params.head_weights.size() == h;
    if (!ok) r.fail("inconsistent LSTM shapes for hidden size " + std::to_string(h));
    return m;
  }
  r.fail("unknown model kind '" + kind + "'");
}

}  // namespace

const std::string* StoredModel::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string format_model(const StoredModel& stored) {
  auto single_token = [](const std::string& s) {
    return !s.empty() && s.find_first_of(" \t\r\n") == std::string::npos;
  };
  Writer w;
  w.integer("depsev-model", kModelFormatVersion);
  w.word("kind", model_kind(stored.model));
  w.integer("columns", static_cast<long long>(stored.columns.size()));
  for (const auto& c : stored.columns) {
    if (!single_token(c)) throw ArgumentError("column name '" + c + "' is empty or has whitespace");
    w.word("column", c);
  }
  w.integer("metadata", static_cast<long long>(stored.metadata.size()));
  for (const auto& [k, v] : stored.metadata) {
    if (!single_token(k) || !single_token(v)) {
      throw ArgumentError("metadata '" + k + "' must be single tokens");
    }
    w.word("meta", k + ' ' + v);
  }
  std::visit([&](const auto& m) { write_body(w, m); }, stored.model);
  return w.str();
}

StoredModel parse_model(std::string_view content, const std::string& source) {
  Reader r(content, source);
  const auto version = r.integer("depsev-model");
  if (version != kModelFormatVersion) {
    throw ParseError(source, 1, "model format version " + std::to_string(version) +
                                    " is not supported (expected " +
                                    std::to_string(kModelFormatVersion) + ")");
  }
  StoredModel stored;
  const auto kind = r.word("kind");
  const auto columns = r.integer("columns");
  for (long long i = 0; i < columns; ++i) stored.columns.push_back(r.word("column"));
  const auto entries = r.integer("metadata");
  for (long long i = 0; i < entries; ++i) {
    auto key = r.word("meta");
    stored.metadata.emplace_back(std::move(key), r.next());
  }
  stored.model = read_body(r, kind);
  r.finish();
  return stored;
}

void save_model(const std::filesystem::path& path, const StoredModel& stored) {
  write_text_file(path, format_model(stored));
}

StoredModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path), path.string());
}

Eigen::VectorXd predict_rows(const AnyModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  struct {
    const Eigen::Ref<const Eigen::MatrixXd>& rows;
    Eigen::VectorXd operator()(const MeanModel& m) const {
      if (m.input_dim != rows.cols()) {
        throw ArgumentError("mean model expects dimension " + std::to_string(m.input_dim) +
                            ", got " + std::to_string(rows.cols()));
      }
      return Eigen::VectorXd::Constant(rows.rows(), m.mean);
    }
    Eigen::VectorXd operator()(const SvrModel& m) const { return models::predict_rows(m, rows); }
    Eigen::VectorXd operator()(const RepTreeModel& m) const { return models::predict_rows(m, rows); }
    Eigen::VectorXd operator()(const LstmModel&) const {
      throw ArgumentError("LSTM models predict on windows, not feature rows");
    }
  } visitor{rows};
  return std::visit(visitor, model);
}

}  // namespace depsev::models

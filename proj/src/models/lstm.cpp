#include "depsev/models/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "depsev/error.hpp"

namespace depsev::models {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct LayerCache {
  std::vector<Eigen::VectorXd> input;
  std::vector<Eigen::VectorXd> i, f, g, o, c, h;
};

LayerCache forward_layer(const LstmLayer& layer, std::vector<Eigen::VectorXd> inputs, int hidden) {
  LayerCache cache;
  const auto steps = inputs.size();
  cache.input = std::move(inputs);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(hidden);
  for (std::size_t t = 0; t < steps; ++t) {
    const Eigen::VectorXd z = layer.w_input * cache.input[t] + layer.w_recurrent * h + layer.bias;
    Eigen::VectorXd gi = z.segment(0, hidden).unaryExpr(&sigmoid);
    Eigen::VectorXd gf = z.segment(hidden, hidden).unaryExpr(&sigmoid);
    Eigen::VectorXd gg = z.segment(2 * hidden, hidden).array().tanh().matrix();
    Eigen::VectorXd go = z.segment(3 * hidden, hidden).unaryExpr(&sigmoid);
    c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
    h = go.cwiseProduct(c.array().tanh().matrix());
    cache.i.push_back(std::move(gi));
    cache.f.push_back(std::move(gf));
    cache.g.push_back(std::move(gg));
    cache.o.push_back(std::move(go));
    cache.c.push_back(c);
    cache.h.push_back(h);
  }
  return cache;
}

// Backpropagation through time. `dh_above[t]` is the loss gradient reaching
// h_t from outside the layer; returns the gradient w.r.t. each input.
std::vector<Eigen::VectorXd> backward_layer(const LstmLayer& layer, const LayerCache& cache,
                                            const std::vector<Eigen::VectorXd>& dh_above,
                                            LstmLayer& grad, int hidden) {
  const auto steps = cache.h.size();
  std::vector<Eigen::VectorXd> dx(steps);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(hidden);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(hidden);
  Eigen::VectorXd dz(4 * hidden);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(hidden);
  for (std::size_t s = steps; s-- > 0;) {
    const Eigen::VectorXd& c_prev = s > 0 ? cache.c[s - 1] : zero;
    const Eigen::VectorXd& h_prev = s > 0 ? cache.h[s - 1] : zero;
    const Eigen::ArrayXd tanh_c = cache.c[s].array().tanh();
    const Eigen::ArrayXd dh = (dh_above[s] + dh_next).array();
    const Eigen::ArrayXd dc = dh * cache.o[s].array() * (1.0 - tanh_c.square()) + dc_next.array();
    const Eigen::ArrayXd i = cache.i[s].array();
    const Eigen::ArrayXd f = cache.f[s].array();
    const Eigen::ArrayXd g = cache.g[s].array();
    const Eigen::ArrayXd o = cache.o[s].array();
    dz.segment(0, hidden) = (dc * g * i * (1.0 - i)).matrix();
    dz.segment(hidden, hidden) = (dc * c_prev.array() * f * (1.0 - f)).matrix();
    dz.segment(2 * hidden, hidden) = (dc * i * (1.0 - g.square())).matrix();
    dz.segment(3 * hidden, hidden) = (dh * tanh_c * o * (1.0 - o)).matrix();
    grad.w_input.noalias() += dz * cache.input[s].transpose();
    grad.w_recurrent.noalias() += dz * h_prev.transpose();
    grad.bias += dz;
    dx[s] = layer.w_input.transpose() * dz;
    dh_next = layer.w_recurrent.transpose() * dz;
    dc_next = (dc * f).matrix();
  }
  return dx;
}

std::vector<Eigen::VectorXd> rows_of(const Eigen::Ref<const Eigen::MatrixXd>& window) {
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(static_cast<std::size_t>(window.rows()));
  for (Eigen::Index t = 0; t < window.rows(); ++t) rows.emplace_back(window.row(t).transpose());
  return rows;
}

template <typename Fn>
void visit(LstmParameters& p, Fn&& fn) {
  for (auto& layer : p.layers) {
    fn(layer.w_input.data(), layer.w_input.size());
    fn(layer.w_recurrent.data(), layer.w_recurrent.size());
    fn(layer.bias.data(), layer.bias.size());
  }
  fn(p.bn_gamma.data(), p.bn_gamma.size());
  fn(p.bn_beta.data(), p.bn_beta.size());
  fn(p.head_weights.data(), p.head_weights.size());
  fn(&p.head_bias, Eigen::Index{1});
}

void check_window(const LstmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& window) {
  if (window.cols() != model.input_dim) {
    throw ArgumentError("LSTM window has dimension " + std::to_string(window.cols()) +
                        ", model expects " + std::to_string(model.input_dim));
  }
  if (window.rows() < 1) throw ArgumentError("LSTM window has no steps");
}

}  // namespace

Eigen::Index LstmParameters::size() const {
  Eigen::Index n = 0;
  visit(const_cast<LstmParameters&>(*this), [&](double*, Eigen::Index len) { n += len; });
  return n;
}

Eigen::VectorXd LstmParameters::flatten() const {
  Eigen::VectorXd flat(size());
  Eigen::Index offset = 0;
  visit(const_cast<LstmParameters&>(*this), [&](double* data, Eigen::Index len) {
    flat.segment(offset, len) = Eigen::Map<const Eigen::VectorXd>(data, len);
    offset += len;
  });
  return flat;
}

void LstmParameters::unflatten(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (flat.size() != size()) throw ArgumentError("LSTM parameter vector size mismatch");
  Eigen::Index offset = 0;
  visit(*this, [&](double* data, Eigen::Index len) {
    Eigen::Map<Eigen::VectorXd>(data, len) = flat.segment(offset, len);
    offset += len;
  });
}

LstmParameters LstmParameters::zeros_like() const {
  LstmParameters z = *this;
  visit(z, [](double* data, Eigen::Index len) { Eigen::Map<Eigen::VectorXd>(data, len).setZero(); });
  return z;
}

LstmModel lstm_init(Eigen::Index input_dim, const LstmConfig& config) {
  if (input_dim < 1) throw ArgumentError("LSTM input dimension must be positive");
  if (config.hidden < 1) throw ArgumentError("LSTM hidden size must be positive");
  const int h = config.hidden;
  Rng rng(config.seed);
  auto uniform = [&](Eigen::Index rows, Eigen::Index cols, double bound) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    }
    return m;
  };
  LstmModel model;
  model.config = config;
  model.input_dim = input_dim;
  Eigen::Index in = input_dim;
  for (auto& layer : model.params.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in + h));
    layer.w_input = uniform(4 * h, in, bound);
    layer.w_recurrent = uniform(4 * h, h, bound);
    layer.bias = Eigen::VectorXd::Zero(4 * h);
    layer.bias.segment(h, h).setOnes();
    in = h;
  }
  model.params.bn_gamma = Eigen::VectorXd::Ones(h);
  model.params.bn_beta = Eigen::VectorXd::Zero(h);
  model.params.head_weights = uniform(h, 1, 1.0 / std::sqrt(static_cast<double>(h)));
  model.params.head_bias = 0.0;
  model.running_mean = Eigen::VectorXd::Zero(h);
  model.running_var = Eigen::VectorXd::Ones(h);
  return model;
}

double predict(const LstmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& window,
               LstmTrace* trace) {
  check_window(model, window);
  const int h = model.config.hidden;
  const auto first = forward_layer(model.params.layers[0], rows_of(window), h);
  const auto second = forward_layer(model.params.layers[1], first.h, h);
  if (trace) {
    const std::array<const LayerCache*, 2> caches = {&first, &second};
    for (int l = 0; l < 2; ++l) {
      trace->input_gate[l] = caches[l]->i;
      trace->forget_gate[l] = caches[l]->f;
      trace->candidate[l] = caches[l]->g;
      trace->output_gate[l] = caches[l]->o;
    }
  }
  const Eigen::ArrayXd inv_std = (model.running_var.array() + model.config.bn_epsilon).rsqrt();
  const Eigen::VectorXd normalized =
      (model.params.bn_gamma.array() * (second.h.back().array() - model.running_mean.array()) *
           inv_std +
       model.params.bn_beta.array())
          .matrix();
  return model.params.head_weights.dot(normalized) + model.params.head_bias;
}

double lstm_loss(const LstmModel& model, std::span<const Eigen::MatrixXd* const> windows,
                 std::span<const double> targets, LstmMode mode, LstmParameters* gradients,
                 Rng* rng, double loss_scale, Eigen::VectorXd* batch_mean,
                 Eigen::VectorXd* batch_var) {
  if (windows.size() != targets.size() || windows.empty()) {
    throw ArgumentError("lstm_loss: need one target per window and at least one window");
  }
  if (mode == LstmMode::Training && !rng) throw ArgumentError("training mode needs a generator");
  const int h = model.config.hidden;
  const auto batch = static_cast<Eigen::Index>(windows.size());
  const auto& p = model.params;

  std::vector<LayerCache> first(windows.size());
  std::vector<LayerCache> second(windows.size());
  Eigen::MatrixXd last(batch, h);
  for (std::size_t b = 0; b < windows.size(); ++b) {
    check_window(model, *windows[b]);
    first[b] = forward_layer(p.layers[0], rows_of(*windows[b]), h);
    second[b] = forward_layer(p.layers[1], first[b].h, h);
    last.row(static_cast<Eigen::Index>(b)) = second[b].h.back().transpose();
  }

  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd var;
  if (mode == LstmMode::Training) {
    mean = last.colwise().mean();
    var = (last.rowwise() - mean).array().square().colwise().mean();
  } else {
    mean = model.running_mean.transpose();
    var = model.running_var.transpose();
  }
  const Eigen::RowVectorXd inv_std = (var.array() + model.config.bn_epsilon).rsqrt().matrix();
  const Eigen::MatrixXd xhat = (last.rowwise() - mean) * inv_std.asDiagonal();
  const Eigen::MatrixXd normalized =
      (xhat * p.bn_gamma.asDiagonal()).rowwise() + p.bn_beta.transpose();

  Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(batch, h);
  if (mode == LstmMode::Training && model.config.dropout > 0.0) {
    const double keep = 1.0 - model.config.dropout;
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (Eigen::Index j = 0; j < h; ++j) mask(b, j) = rng->uniform() < keep ? 1.0 / keep : 0.0;
    }
  }
  const Eigen::MatrixXd dropped = normalized.cwiseProduct(mask);
  const Eigen::VectorXd pred = (dropped * p.head_weights).array() + p.head_bias;
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), batch);
  const Eigen::VectorXd residual = pred - y;
  const double loss = loss_scale * residual.squaredNorm() / static_cast<double>(batch);

  if (batch_mean) *batch_mean = mean.transpose();
  if (batch_var) *batch_var = var.transpose();
  if (!gradients) return loss;

  LstmParameters& g = *gradients;
  g = p.zeros_like();
  const Eigen::VectorXd dpred = loss_scale * 2.0 * residual / static_cast<double>(batch);
  g.head_bias = dpred.sum();
  g.head_weights = dropped.transpose() * dpred;
  const Eigen::MatrixXd dnorm = (dpred * p.head_weights.transpose()).cwiseProduct(mask);
  g.bn_gamma = (dnorm.cwiseProduct(xhat)).colwise().sum().transpose();
  g.bn_beta = dnorm.colwise().sum().transpose();
  const Eigen::MatrixXd dxhat = dnorm * p.bn_gamma.asDiagonal();
  Eigen::MatrixXd dlast;
  if (mode == LstmMode::Training) {
    const double bd = static_cast<double>(batch);
    const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
    const Eigen::RowVectorXd sum_dxhat_xhat = dxhat.cwiseProduct(xhat).colwise().sum();
    dlast = ((bd * dxhat).rowwise() - sum_dxhat - (xhat * sum_dxhat_xhat.asDiagonal())) *
            (inv_std / bd).asDiagonal();
  } else {
    dlast = dxhat * inv_std.asDiagonal();
  }

  for (std::size_t b = 0; b < windows.size(); ++b) {
    const auto steps = second[b].h.size();
    std::vector<Eigen::VectorXd> dh2(steps, Eigen::VectorXd::Zero(h));
    dh2.back() = dlast.row(static_cast<Eigen::Index>(b)).transpose();
    const auto dh1 = backward_layer(p.layers[1], second[b], dh2, g.layers[1], h);
    backward_layer(p.layers[0], first[b], dh1, g.layers[0], h);
  }
  return loss;
}

double lstm_gradient_check(const LstmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& window,
                           double target, double h) {
  const Eigen::MatrixXd copy = window;
  const std::array<const Eigen::MatrixXd*, 1> windows = {&copy};
  const std::array<double, 1> targets = {target};
  LstmParameters analytic;
  lstm_loss(model, windows, targets, LstmMode::Inference, &analytic);
  const Eigen::VectorXd grad = analytic.flatten();

  LstmModel probe = model;
  const Eigen::VectorXd theta = model.params.flatten();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd shifted = theta;
    shifted[k] = theta[k] + h;
    probe.params.unflatten(shifted);
    const double up = lstm_loss(probe, windows, targets, LstmMode::Inference, nullptr);
    shifted[k] = theta[k] - h;
    probe.params.unflatten(shifted);
    const double down = lstm_loss(probe, windows, targets, LstmMode::Inference, nullptr);
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(grad[k] - numeric) /
                       std::max(std::abs(grad[k]) + std::abs(numeric), 1e-4);
    worst = std::max(worst, err);
  }
  return worst;
}

std::string describe(const LstmConfig& c) {
  std::ostringstream s;
  s << "hidden=" << c.hidden << " dropout=" << c.dropout << " learning_rate=" << c.learning_rate
    << " batch_size=" << c.batch_size << " clip_norm=" << c.clip_norm << " epochs=" << c.epochs
    << " bn_momentum=" << c.bn_momentum << " bn_epsilon=" << c.bn_epsilon << " seed=" << c.seed;
  return s.str();
}

namespace {

double dataset_loss(const LstmModel& model, const face::WindowBatch& data) {
  std::vector<const Eigen::MatrixXd*> windows;
  std::vector<double> targets;
  for (const auto& w : data.windows) {
    windows.push_back(&w.samples);
    targets.push_back(w.label);
  }
  return lstm_loss(model, windows, targets, LstmMode::Inference, nullptr);
}

void check_batch(const face::WindowBatch& data, Eigen::Index q, const char* what) {
  for (const auto& w : data.windows) {
    if (w.samples.cols() != q) {
      throw ArgumentError(std::string(what) + " window of session " + w.session_id +
                          " has dimension " + std::to_string(w.samples.cols()) + ", expected " +
                          std::to_string(q));
    }
    if (!std::isfinite(w.label)) {
      throw ArgumentError(std::string(what) + " window of session " + w.session_id +
                          " has no label");
    }
  }
}

}  // namespace

LstmModel lstm_train(const face::WindowBatch& train, const face::WindowBatch& validation,
                     const LstmConfig& config) {
  if (train.windows.empty()) throw ArgumentError("lstm_train: no training windows");
  if (config.batch_size < 1 || config.epochs < 0) throw ArgumentError("lstm_train: bad config");
  const Eigen::Index q = train.windows.front().samples.cols();
  check_batch(train, q, "training");
  check_batch(validation, q, "validation");

  LstmModel model = lstm_init(q, config);
  double target_mean = 0.0;
  for (const auto& w : train.windows) target_mean += w.label;
  model.params.head_bias = target_mean / static_cast<double>(train.windows.size());

  const bool has_validation = !validation.windows.empty();
  auto record = [&](LstmModel& m) {
    const double tl = dataset_loss(m, train);
    const double vl = has_validation ? dataset_loss(m, validation) : tl;
    if (!std::isfinite(tl) || !std::isfinite(vl)) {
      throw NumericError("LSTM training diverged (loss is not finite); config: " + describe(config));
    }
    m.train_loss.push_back(tl);
    if (has_validation) m.validation_loss.push_back(vl);
    return vl;
  };

  double best_loss = record(model);
  LstmModel best = model;

  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(model.params.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(model.params.size());
  long step = 0;
  std::vector<std::size_t> order(train.windows.size());
  std::iota(order.begin(), order.end(), 0);
  LstmParameters grad;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      std::vector<const Eigen::MatrixXd*> windows;
      std::vector<double> targets;
      for (auto k = begin; k < end; ++k) {
        windows.push_back(&train.windows[order[k]].samples);
        targets.push_back(train.windows[order[k]].label);
      }
      Eigen::VectorXd batch_mean;
      Eigen::VectorXd batch_var;
      lstm_loss(model, windows, targets, LstmMode::Training, &grad, &rng, 1.0, &batch_mean,
                &batch_var);
      Eigen::VectorXd g = grad.flatten();
      if (!g.allFinite()) {
        throw NumericError("LSTM gradient is not finite at epoch " + std::to_string(epoch) +
                           "; config: " + describe(config));
      }
      const double norm = g.norm();
      if (config.clip_norm > 0.0 && norm > config.clip_norm) g *= config.clip_norm / norm;

      ++step;
      m1 = config.adam_beta1 * m1 + (1.0 - config.adam_beta1) * g;
      m2 = config.adam_beta2 * m2 + (1.0 - config.adam_beta2) * g.cwiseAbs2();
      const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
      const Eigen::VectorXd update =
          config.learning_rate * (m1 / c1).array() / ((m2 / c2).array().sqrt() + config.adam_epsilon);
      model.params.unflatten(model.params.flatten() - update);

      const auto count = static_cast<double>(windows.size());
      const Eigen::VectorXd unbiased = count > 1 ? Eigen::VectorXd(batch_var * (count / (count - 1)))
                                                 : batch_var;
      model.running_mean = (1.0 - config.bn_momentum) * model.running_mean + config.bn_momentum * batch_mean;
      model.running_var = (1.0 - config.bn_momentum) * model.running_var + config.bn_momentum * unbiased;
    }
    const double loss = record(model);
    if (loss < best_loss) {
      best_loss = loss;
      best = model;
      best.best_epoch = epoch;
    }
  }
  // Keep the full loss curves on the returned snapshot.
  best.train_loss = model.train_loss;
  best.validation_loss = model.validation_loss;
  if (!has_validation) {
    model.best_epoch = config.epochs;
    return model;
  }
  return best;
}

}  // namespace depsev::models

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "depsev/face.hpp"
#include "depsev/random.hpp"

namespace depsev::models {

struct LstmConfig {
  int hidden = 16;
  double dropout = 0.5;
  double learning_rate = 1e-3;
  int batch_size = 32;
  double clip_norm = 5.0;
  int epochs = 100;
  // Weight of the newest batch in the running batch-norm statistics.
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;
};

// Gate blocks are stacked input, forget, candidate, output (4H rows).
struct LstmLayer {
  Eigen::MatrixXd w_input;
  Eigen::MatrixXd w_recurrent;
  Eigen::VectorXd bias;
};

struct LstmParameters {
  std::array<LstmLayer, 2> layers;
  Eigen::VectorXd bn_gamma;
  Eigen::VectorXd bn_beta;
  Eigen::VectorXd head_weights;
  double head_bias = 0.0;

  Eigen::Index size() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::Ref<const Eigen::VectorXd>& flat);
  LstmParameters zeros_like() const;
};

struct LstmModel {
  LstmConfig config;
  Eigen::Index input_dim = 0;
  LstmParameters params;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
  // Per-epoch losses; index 0 is before the first update.
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  int best_epoch = 0;
};

// Seeded uniform fan-in initialization (+-1/sqrt(fan_in)); forget-gate biases 1.
LstmModel lstm_init(Eigen::Index input_dim, const LstmConfig& config);

enum class LstmMode {
  Inference,  // frozen batch-norm statistics, no dropout
  Training,   // batch statistics, dropout masks drawn from the generator
};

// Per-step gate activations of one forward pass, for inspection.
struct LstmTrace {
  std::array<std::vector<Eigen::VectorXd>, 2> input_gate;
  std::array<std::vector<Eigen::VectorXd>, 2> forget_gate;
  std::array<std::vector<Eigen::VectorXd>, 2> candidate;
  std::array<std::vector<Eigen::VectorXd>, 2> output_gate;
};

// Inference-mode prediction for one window (steps x input_dim).
double predict(const LstmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& window,
               LstmTrace* trace = nullptr);

// loss_scale * mean squared error over the batch, with its gradient when
// `gradients` is non-null. `rng` is required in Training mode (dropout masks).
double lstm_loss(const LstmModel& model, std::span<const Eigen::MatrixXd* const> windows,
                 std::span<const double> targets, LstmMode mode, LstmParameters* gradients,
                 Rng* rng = nullptr, double loss_scale = 1.0,
                 Eigen::VectorXd* batch_mean = nullptr, Eigen::VectorXd* batch_var = nullptr);

// Largest relative error |a - n| / max(|a| + |n|, 1e-4) between the analytic
// gradient and central differences with step h, over every parameter, in
// inference mode.
double lstm_gradient_check(const LstmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& window,
                           double target, double h);

// Mini-batch Adam on MSE with gradient-norm clipping. After every epoch the
// inference-mode losses are recorded; the snapshot with the lowest validation
// loss (training loss when `validation` is empty) is returned. Throws
// ArgumentError on dimension mismatch and NumericError on divergence.
LstmModel lstm_train(const face::WindowBatch& train, const face::WindowBatch& validation,
                     const LstmConfig& config);

std::string describe(const LstmConfig& config);

}  // namespace depsev::models

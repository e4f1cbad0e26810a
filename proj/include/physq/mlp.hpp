#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace physq {

/// Fully-connected network with ReLU hidden layers and an identity output
/// layer. Samples are stored column-wise.
struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: out x in
  std::vector<Eigen::VectorXd> biases;

  static MlpModel zeros(const std::vector<int>& layer_sizes);
  // He-normal weights, zero biases; deterministic given seed.
  static MlpModel random(const std::vector<int>& layer_sizes, std::uint64_t seed);

  int input_size() const { return static_cast<int>(weights.front().cols()); }
  int output_size() const { return static_cast<int>(weights.back().rows()); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  long num_params() const;

  // Forward tape: activations[0] is the input, activations[l] the output of
  // layer l after its nonlinearity.
  struct Tape {
    std::vector<Eigen::MatrixXd> activations;
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, Tape& tape) const;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGrads zeros_like(const MlpModel& model);
  void set_zero();
};

// Backpropagates d(loss)/d(output) through the tape, accumulating parameter
// gradients into `grads`; returns d(loss)/d(input).
Eigen::MatrixXd mlp_backward(const MlpModel& model, const MlpModel::Tape& tape,
                             const Eigen::MatrixXd& output_grad, MlpGrads& grads);

/// Adam moment buffers for one MlpModel.
struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long t = 0;

  static AdamState zeros_like(const MlpModel& model);
  void update(MlpModel& model, const MlpGrads& grads, double lr,
              double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  // Advances the shared timestep without touching a model; used when several
  // models are updated jointly against one loss.
  void tick() { ++t; }
};

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 2048;
  int max_epochs = 500;
  int patience = 20;  // early-stop window on the epoch training loss
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitResult {
  std::vector<double> loss_history;  // mean squared error per epoch
  double final_loss() const { return loss_history.empty() ? 0.0 : loss_history.back(); }
};

// Mini-batch Adam on the mean squared error. `mask`, when given, must have
// the shape of `targets`; error terms are multiplied by it element-wise
// (used for per-action Q targets). Deterministic given config.seed.
FitResult mlp_fit(MlpModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& config,
                  const Eigen::MatrixXd* mask = nullptr);

// Max relative error between analytic and central-finite-difference
// gradients of the single-sample MSE loss.
double grad_check(const MlpModel& model, const Eigen::VectorXd& input,
                  const Eigen::VectorXd& target, double h = 1e-5);

/// Per-feature standardization fitted on a training set.
struct FeatureScaler {
  Eigen::VectorXd mean, stddev;

  void fit(const Eigen::MatrixXd& inputs);  // samples column-wise
  Eigen::MatrixXd apply(const Eigen::MatrixXd& inputs) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& input) const;
};

void save_mlp(std::ostream& os, const MlpModel& model);
MlpModel load_mlp(std::istream& is);

}  // namespace physq

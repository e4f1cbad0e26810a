#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>

#include <Eigen/Dense>

#include "physq/extra_trees.hpp"
#include "physq/mlp.hpp"

namespace physq {

/// Common fit/predict surface for the per-timeslot Q-function approximators.
/// fit() receives one target per (state, taken action) pair; predict()
/// returns the value of both actions.
class QRegressor {
 public:
  virtual ~QRegressor() = default;

  // features: samples x dim, actions in {0,1}, one target per sample.
  virtual void fit(const Eigen::MatrixXd& features, const Eigen::VectorXi& actions,
                   const Eigen::VectorXd& targets) = 0;
  virtual Eigen::Vector2d predict(const Eigen::VectorXd& features) const = 0;
  // samples x 2 matrix of action values.
  virtual Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& features) const;

  virtual double train_loss() const { return 0.0; }
  virtual void save(std::ostream& os) const = 0;
};

/// Network head with two outputs (one per action); only the taken action's
/// output contributes to the fitting loss. Inputs are standardized with
/// statistics from the training set.
class MlpQRegressor : public QRegressor {
 public:
  MlpQRegressor(int input_dim, std::vector<int> hidden, TrainConfig config,
                std::uint64_t seed);

  void fit(const Eigen::MatrixXd& features, const Eigen::VectorXi& actions,
           const Eigen::VectorXd& targets) override;
  Eigen::Vector2d predict(const Eigen::VectorXd& features) const override;
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& features) const override;
  double train_loss() const override { return fit_.final_loss(); }
  void save(std::ostream& os) const override;
  static std::unique_ptr<MlpQRegressor> load(std::istream& is);

 private:
  MlpQRegressor() = default;
  MlpModel model_;
  TrainConfig config_;
  FeatureScaler scaler_;
  FitResult fit_;
  bool fitted_ = false;
};

/// Extra-trees head; the action is appended as an extra input feature.
class TreeQRegressor : public QRegressor {
 public:
  TreeQRegressor(TreeParams params, std::uint64_t seed);

  void fit(const Eigen::MatrixXd& features, const Eigen::VectorXi& actions,
           const Eigen::VectorXd& targets) override;
  Eigen::Vector2d predict(const Eigen::VectorXd& features) const override;
  void save(std::ostream& os) const override;
  static std::unique_ptr<TreeQRegressor> load(std::istream& is);

 private:
  TreeQRegressor() = default;
  TreeParams params_;
  std::uint64_t seed_ = 0;
  TreeEnsembleModel model_;
};

// (input_dim, slot-specific seed) -> fresh approximator.
using RegressorFactory =
    std::function<std::unique_ptr<QRegressor>(int input_dim, std::uint64_t seed)>;

// Benchmark default configurations.
RegressorFactory make_fqi_nn_factory();     // [48,48], Adam lr 0.01, batch 2048
RegressorFactory make_physq_nn_factory();   // [32,32], Adam lr 0.001, batch 2048
RegressorFactory make_fqi_et_factory();     // 100 estimators, split 3, leaf 1

std::unique_ptr<QRegressor> load_regressor(std::istream& is);

}  // namespace physq

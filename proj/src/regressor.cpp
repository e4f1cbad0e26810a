#include "physq/regressor.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace physq {

Eigen::MatrixXd QRegressor::predict_batch(const Eigen::MatrixXd& features) const {
  Eigen::MatrixXd out(features.rows(), 2);
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    out.row(i) = predict(features.row(i).transpose()).transpose();
  return out;
}

MlpQRegressor::MlpQRegressor(int input_dim, std::vector<int> hidden,
                             TrainConfig config, std::uint64_t seed)
    : config_(config) {
  config_.seed = seed;
  std::vector<int> sizes;
  sizes.push_back(input_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(2);
  model_ = MlpModel::random(sizes, seed);
}

void MlpQRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXi& actions,
                        const Eigen::VectorXd& targets) {
  const Eigen::Index n = features.rows();
  if (n == 0) throw std::invalid_argument("MlpQRegressor::fit: empty dataset");
  if (actions.size() != n || targets.size() != n)
    throw std::invalid_argument("MlpQRegressor::fit: size mismatch");
  const Eigen::MatrixXd X = features.transpose();
  scaler_.fit(X);
  const Eigen::MatrixXd Xs = scaler_.apply(X);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(2, n);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = actions(i);
    if (a != 0 && a != 1) throw std::invalid_argument("MlpQRegressor::fit: action must be 0 or 1");
    T(a, i) = targets(i);
    mask(a, i) = 1.0;
  }
  fit_ = mlp_fit(model_, Xs, T, config_, &mask);
  fitted_ = true;
}

Eigen::Vector2d MlpQRegressor::predict(const Eigen::VectorXd& features) const {
  if (!fitted_) throw std::logic_error("MlpQRegressor::predict: model not fitted");
  return model_.forward(scaler_.apply(features));
}

Eigen::MatrixXd MlpQRegressor::predict_batch(const Eigen::MatrixXd& features) const {
  if (!fitted_) throw std::logic_error("MlpQRegressor::predict_batch: model not fitted");
  const Eigen::MatrixXd X = features.transpose();
  return model_.forward(scaler_.apply(X)).transpose();
}

void MlpQRegressor::save(std::ostream& os) const {
  if (!fitted_) throw std::logic_error("MlpQRegressor::save: model not fitted");
  os.precision(17);
  os << "mlpq " << config_.learning_rate << ' ' << config_.batch_size << ' '
     << config_.max_epochs << ' ' << config_.patience << ' ' << config_.seed << '\n';
  for (Eigen::Index i = 0; i < scaler_.mean.size(); ++i) os << scaler_.mean(i) << ' ';
  os << '\n';
  for (Eigen::Index i = 0; i < scaler_.stddev.size(); ++i) os << scaler_.stddev(i) << ' ';
  os << '\n';
  save_mlp(os, model_);
}

std::unique_ptr<MlpQRegressor> MlpQRegressor::load(std::istream& is) {
  auto r = std::unique_ptr<MlpQRegressor>(new MlpQRegressor());
  std::string tag;
  if (!(is >> tag >> r->config_.learning_rate >> r->config_.batch_size >>
        r->config_.max_epochs >> r->config_.patience >> r->config_.seed) ||
      tag != "mlpq")
    throw std::runtime_error("MlpQRegressor::load: bad header");
  r->model_ = MlpModel();  // placeholder until weights arrive
  // The scaler dimension equals the model input size, which we only learn
  // after reading the network, so buffer the two stat lines first.
  std::vector<double> mean, stddev;
  std::string line;
  std::getline(is, line);  // consume end of header line
  for (std::vector<double>* vec : {&mean, &stddev}) {
    if (!std::getline(is, line)) throw std::runtime_error("MlpQRegressor::load: truncated scaler");
    std::istringstream ls(line);
    double v;
    while (ls >> v) vec->push_back(v);
  }
  r->model_ = load_mlp(is);
  if (static_cast<int>(mean.size()) != r->model_.input_size() || stddev.size() != mean.size())
    throw std::runtime_error("MlpQRegressor::load: scaler/model size mismatch");
  r->scaler_.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), mean.size());
  r->scaler_.stddev = Eigen::Map<Eigen::VectorXd>(stddev.data(), stddev.size());
  r->fitted_ = true;
  return r;
}

TreeQRegressor::TreeQRegressor(TreeParams params, std::uint64_t seed)
    : params_(params), seed_(seed) {}

void TreeQRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXi& actions,
                         const Eigen::VectorXd& targets) {
  const Eigen::Index n = features.rows();
  if (actions.size() != n || targets.size() != n)
    throw std::invalid_argument("TreeQRegressor::fit: size mismatch");
  Eigen::MatrixXd X(n, features.cols() + 1);
  X.leftCols(features.cols()) = features;
  X.col(features.cols()) = actions.cast<double>();
  model_ = trees_fit(X, targets, params_, seed_);
}

Eigen::Vector2d TreeQRegressor::predict(const Eigen::VectorXd& features) const {
  Eigen::VectorXd x(features.size() + 1);
  x.head(features.size()) = features;
  Eigen::Vector2d q;
  for (int a = 0; a < 2; ++a) {
    x(features.size()) = a;
    q(a) = trees_predict(model_, x);
  }
  return q;
}

void TreeQRegressor::save(std::ostream& os) const {
  os << "treeq " << seed_ << '\n';
  save_trees(os, model_);
}

std::unique_ptr<TreeQRegressor> TreeQRegressor::load(std::istream& is) {
  auto r = std::unique_ptr<TreeQRegressor>(new TreeQRegressor());
  std::string tag;
  if (!(is >> tag >> r->seed_) || tag != "treeq")
    throw std::runtime_error("TreeQRegressor::load: bad header");
  r->model_ = load_trees(is);
  r->params_ = r->model_.params;
  return r;
}

RegressorFactory make_fqi_nn_factory() {
  return [](int input_dim, std::uint64_t seed) -> std::unique_ptr<QRegressor> {
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.batch_size = 2048;
    return std::make_unique<MlpQRegressor>(input_dim, std::vector<int>{48, 48}, cfg, seed);
  };
}

RegressorFactory make_physq_nn_factory() {
  return [](int input_dim, std::uint64_t seed) -> std::unique_ptr<QRegressor> {
    TrainConfig cfg;
    cfg.learning_rate = 0.001;
    cfg.batch_size = 2048;
    return std::make_unique<MlpQRegressor>(input_dim, std::vector<int>{32, 32}, cfg, seed);
  };
}

RegressorFactory make_fqi_et_factory() {
  return [](int /*input_dim*/, std::uint64_t seed) -> std::unique_ptr<QRegressor> {
    return std::make_unique<TreeQRegressor>(TreeParams{}, seed);
  };
}

std::unique_ptr<QRegressor> load_regressor(std::istream& is) {
  // Dispatch on the tag without consuming it.
  std::string tag;
  const auto pos = is.tellg();
  if (!(is >> tag)) throw std::runtime_error("load_regressor: empty stream");
  is.seekg(pos);
  if (tag == "mlpq") return MlpQRegressor::load(is);
  if (tag == "treeq") return TreeQRegressor::load(is);
  throw std::runtime_error("load_regressor: unknown tag '" + tag + "'");
}

}  // namespace physq

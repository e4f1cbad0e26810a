#include "physq/mlp.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "physq/rng.hpp"

namespace physq {

MlpModel MlpModel::zeros(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("MlpModel: need at least input and output size");
  MlpModel m;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    m.weights.emplace_back(Eigen::MatrixXd::Zero(layer_sizes[l + 1], layer_sizes[l]));
    m.biases.emplace_back(Eigen::VectorXd::Zero(layer_sizes[l + 1]));
  }
  return m;
}

MlpModel MlpModel::random(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  MlpModel m = zeros(layer_sizes);
  Rng rng(mix_seed(seed, 0x31f0));
  for (auto& W : m.weights) {
    const double scale = std::sqrt(2.0 / W.cols());
    for (Eigen::Index j = 0; j < W.cols(); ++j)
      for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = rng.normal(0.0, scale);
  }
  return m;
}

long MlpModel::num_params() const {
  long n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += weights[l].size() + biases[l].size();
  return n;
}

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& inputs) const {
  Tape tape;
  return forward(inputs, tape);
}

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& inputs, Tape& tape) const {
  if (inputs.rows() != input_size())
    throw std::invalid_argument("MlpModel::forward: input has " + std::to_string(inputs.rows()) +
                                " rows, model expects " + std::to_string(input_size()));
  tape.activations.assign(1, inputs);
  Eigen::MatrixXd a = inputs;
  const int L = num_layers();
  for (int l = 0; l < L; ++l) {
    a = (weights[l] * a).colwise() + biases[l];
    if (l + 1 < L) a = a.cwiseMax(0.0);
    tape.activations.push_back(a);
  }
  return a;
}

MlpGrads MlpGrads::zeros_like(const MlpModel& model) {
  MlpGrads g;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    g.biases.emplace_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return g;
}

void MlpGrads::set_zero() {
  for (auto& W : weights) W.setZero();
  for (auto& b : biases) b.setZero();
}

Eigen::MatrixXd mlp_backward(const MlpModel& model, const MlpModel::Tape& tape,
                             const Eigen::MatrixXd& output_grad, MlpGrads& grads) {
  const int L = model.num_layers();
  Eigen::MatrixXd delta = output_grad;
  for (int l = L - 1; l >= 0; --l) {
    if (l + 1 < L) {
      // ReLU: the stored activation is already rectified.
      delta = delta.cwiseProduct(
          (tape.activations[l + 1].array() > 0.0).cast<double>().matrix());
    }
    grads.weights[l].noalias() += delta * tape.activations[l].transpose();
    grads.biases[l].noalias() += delta.rowwise().sum();
    delta = (model.weights[l].transpose() * delta).eval();
  }
  return delta;
}

AdamState AdamState::zeros_like(const MlpModel& model) {
  AdamState s;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    s.m_w.emplace_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    s.v_w.emplace_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    s.m_b.emplace_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    s.v_b.emplace_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return s;
}

void AdamState::update(MlpModel& model, const MlpGrads& grads, double lr,
                       double beta1, double beta2, double eps) {
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * grads.weights[l];
    v_w[l] = beta2 * v_w[l].array() + (1.0 - beta2) * grads.weights[l].array().square();
    model.weights[l].array() -=
        lr * (m_w[l].array() / bc1) / ((v_w[l].array() / bc2).sqrt() + eps);
    m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * grads.biases[l];
    v_b[l] = beta2 * v_b[l].array() + (1.0 - beta2) * grads.biases[l].array().square();
    model.biases[l].array() -=
        lr * (m_b[l].array() / bc1) / ((v_b[l].array() / bc2).sqrt() + eps);
  }
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (batch_size <= 0) throw std::invalid_argument("TrainConfig: batch size must be positive");
  if (max_epochs < 0) throw std::invalid_argument("TrainConfig: negative epoch count");
}

FitResult mlp_fit(MlpModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& config,
                  const Eigen::MatrixXd* mask) {
  config.validate();
  const Eigen::Index n = inputs.cols();
  if (n < 1) throw std::invalid_argument("mlp_fit: need at least one sample");
  if (targets.cols() != n)
    throw std::invalid_argument("mlp_fit: inputs/targets sample count mismatch");
  if (!targets.allFinite()) throw std::invalid_argument("mlp_fit: non-finite targets");
  if (mask && (mask->rows() != targets.rows() || mask->cols() != targets.cols()))
    throw std::invalid_argument("mlp_fit: mask shape mismatch");

  FitResult result;
  if (config.max_epochs == 0) return result;

  Rng rng(mix_seed(config.seed, 0xf17));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  AdamState adam = AdamState::zeros_like(model);
  MlpGrads grads = MlpGrads::zeros_like(model);
  MlpModel::Tape tape;

  const Eigen::Index bs = std::min<Eigen::Index>(config.batch_size, n);
  Eigen::MatrixXd bx(inputs.rows(), bs), bt(targets.rows(), bs), bm;
  if (mask) bm.resize(targets.rows(), bs);

  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    // Fisher-Yates with the project RNG keeps shuffles platform-stable.
    for (Eigen::Index i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);

    double sq_sum = 0.0;
    double weight_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index m = std::min(bs, n - start);
      for (Eigen::Index j = 0; j < m; ++j) {
        bx.col(j) = inputs.col(order[start + j]);
        bt.col(j) = targets.col(order[start + j]);
        if (mask) bm.col(j) = mask->col(order[start + j]);
      }
      const auto X = bx.leftCols(m);
      const auto T = bt.leftCols(m);
      Eigen::MatrixXd err = model.forward(X, tape) - T;
      if (mask) err = err.cwiseProduct(bm.leftCols(m));
      sq_sum += err.squaredNorm();
      weight_sum += mask ? bm.leftCols(m).sum() : static_cast<double>(err.size());
      grads.set_zero();
      mlp_backward(model, tape, (2.0 / m) * err, grads);
      adam.tick();
      adam.update(model, grads, config.learning_rate);
    }
    const double loss = sq_sum / std::max(1.0, weight_sum);
    if (!std::isfinite(loss))
      throw std::runtime_error("mlp_fit: loss diverged to NaN/inf at epoch " + std::to_string(epoch));
    result.loss_history.push_back(loss);

    if (loss < best * (1.0 - 1e-6)) {
      best = loss;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

double grad_check(const MlpModel& model, const Eigen::VectorXd& input,
                  const Eigen::VectorXd& target, double h) {
  MlpModel work = model;
  MlpModel::Tape tape;
  MlpGrads grads = MlpGrads::zeros_like(work);
  const Eigen::MatrixXd x = input, t = target;
  Eigen::MatrixXd err = work.forward(x, tape) - t;
  mlp_backward(work, tape, 2.0 * err, grads);

  auto loss_at = [&]() {
    return (work.forward(x) - t).squaredNorm();
  };
  double max_rel = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double lp = loss_at();
    param = saved - h;
    const double lm = loss_at();
    param = saved;
    const double numeric = (lp - lm) / (2.0 * h);
    const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < work.weights.size(); ++l) {
    for (Eigen::Index j = 0; j < work.weights[l].cols(); ++j)
      for (Eigen::Index i = 0; i < work.weights[l].rows(); ++i)
        probe(work.weights[l](i, j), grads.weights[l](i, j));
    for (Eigen::Index i = 0; i < work.biases[l].size(); ++i)
      probe(work.biases[l](i), grads.biases[l](i));
  }
  return max_rel;
}

void FeatureScaler::fit(const Eigen::MatrixXd& inputs) {
  mean = inputs.rowwise().mean();
  Eigen::MatrixXd centered = inputs.colwise() - mean;
  stddev = (centered.array().square().rowwise().mean()).sqrt();
  for (Eigen::Index i = 0; i < stddev.size(); ++i)
    if (stddev(i) < 1e-12) stddev(i) = 1.0;  // constant feature
}

Eigen::MatrixXd FeatureScaler::apply(const Eigen::MatrixXd& inputs) const {
  return (inputs.colwise() - mean).array().colwise() / stddev.array();
}

Eigen::VectorXd FeatureScaler::apply(const Eigen::VectorXd& input) const {
  return (input - mean).array() / stddev.array();
}

void save_mlp(std::ostream& os, const MlpModel& model) {
  os.precision(17);
  os << "mlp " << model.num_layers() + 1;
  os << ' ' << model.input_size();
  for (const auto& W : model.weights) os << ' ' << W.rows();
  os << '\n';
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < model.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < model.weights[l].cols(); ++j)
        os << model.weights[l](i, j) << ' ';
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i)
      os << model.biases[l](i) << ' ';
    os << '\n';
  }
}

MlpModel load_mlp(std::istream& is) {
  std::string tag;
  int n_sizes = 0;
  if (!(is >> tag >> n_sizes) || tag != "mlp")
    throw std::runtime_error("load_mlp: bad header");
  std::vector<int> sizes(n_sizes);
  for (int& s : sizes)
    if (!(is >> s)) throw std::runtime_error("load_mlp: truncated layer sizes");
  MlpModel m = MlpModel::zeros(sizes);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j)
        if (!(is >> m.weights[l](i, j))) throw std::runtime_error("load_mlp: truncated weights");
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i)
      if (!(is >> m.biases[l](i))) throw std::runtime_error("load_mlp: truncated biases");
  }
  return m;
}

}  // namespace physq

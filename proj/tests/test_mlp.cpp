#include <doctest.h>

#include <cmath>
#include <sstream>

#include "physq/mlp.hpp"
#include "physq/rng.hpp"

using namespace physq;

TEST_SUITE_BEGIN("mlp");

TEST_CASE("zero model maps everything to zero") {
  const MlpModel m = MlpModel::zeros({3, 4, 2});
  const Eigen::MatrixXd out = m.forward(Eigen::MatrixXd::Random(3, 5));
  CHECK(out.rows() == 2);
  CHECK(out.cols() == 5);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.num_params() == 3 * 4 + 4 + 4 * 2 + 2);
}

TEST_CASE("single identity layer is the identity map") {
  MlpModel m = MlpModel::zeros({3, 3});
  m.weights[0] = Eigen::Matrix3d::Identity();
  const Eigen::VectorXd x = Eigen::Vector3d(-1.5, 0.0, 2.5);
  // The output layer has no nonlinearity, so negatives pass through.
  CHECK((m.forward(x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward pass matches an independently coded oracle") {
  // 2-2-1 network evaluated with plain scalar arithmetic.
  MlpModel m = MlpModel::zeros({2, 2, 1});
  m.weights[0] << 0.5, -1.0, 2.0, 0.25;
  m.biases[0] << 0.1, -0.3;
  m.weights[1] << 1.5, -0.5;
  m.biases[1] << 0.2;

  const double x0 = 0.7, x1 = -0.4;
  const double h0 = std::max(0.0, 0.5 * x0 - 1.0 * x1 + 0.1);
  const double h1 = std::max(0.0, 2.0 * x0 + 0.25 * x1 - 0.3);
  const double y = 1.5 * h0 - 0.5 * h1 + 0.2;

  const Eigen::VectorXd out = m.forward(Eigen::Vector2d(x0, x1));
  CHECK(out(0) == doctest::Approx(y).epsilon(1e-12));
}

TEST_CASE("He initialization is deterministic and seed-sensitive") {
  const MlpModel a = MlpModel::random({4, 8, 2}, 3);
  const MlpModel b = MlpModel::random({4, 8, 2}, 3);
  const MlpModel c = MlpModel::random({4, 8, 2}, 4);
  CHECK((a.weights[0] - b.weights[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.weights[0] - c.weights[0]).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.biases[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit recovers a linear function") {
  Rng rng(5);
  const int n = 256;
  Eigen::MatrixXd X(2, n);
  Eigen::MatrixXd Y(1, n);
  for (int i = 0; i < n; ++i) {
    X(0, i) = rng.uniform(-1.0, 1.0);
    X(1, i) = rng.uniform(-1.0, 1.0);
    Y(0, i) = 0.8 * X(0, i) - 0.3 * X(1, i) + 0.5;
  }
  MlpModel m = MlpModel::random({2, 16, 1}, 7);
  TrainConfig cfg{.learning_rate = 0.01, .batch_size = 64, .max_epochs = 400,
                  .patience = 50, .seed = 1};
  const FitResult r = mlp_fit(m, X, Y, cfg);
  REQUIRE(!r.loss_history.empty());
  CHECK(r.final_loss() < 1e-3);
  CHECK(r.final_loss() < r.loss_history.front());
}

TEST_CASE("zero epochs leaves the model untouched") {
  MlpModel m = MlpModel::random({2, 4, 1}, 1);
  const MlpModel before = m;
  TrainConfig cfg{.learning_rate = 0.01, .batch_size = 8, .max_epochs = 0,
                  .patience = 5, .seed = 0};
  const FitResult r = mlp_fit(m, Eigen::MatrixXd::Random(2, 8),
                              Eigen::MatrixXd::Random(1, 8), cfg);
  CHECK(r.loss_history.empty());
  CHECK((m.weights[0] - before.weights[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant targets are fitted closely") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(3, 64);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(1, 64, 4.2);
  MlpModel m = MlpModel::random({3, 8, 1}, 2);
  TrainConfig cfg{.learning_rate = 0.003, .batch_size = 64, .max_epochs = 5000,
                  .patience = 5000, .seed = 3};
  const FitResult r = mlp_fit(m, X, Y, cfg);
  // Adam converges on a slow tail here; require a large relative reduction
  // and a small residual rather than machine precision.
  CHECK(r.final_loss() < 5e-3);
  CHECK(r.final_loss() < 1e-3 * r.loss_history.front());
  double max_err = 0.0;
  for (int i = 0; i < 64; ++i)
    max_err = std::max(max_err, std::abs(m.forward(X.col(i))(0) - 4.2));
  CHECK(max_err < 0.25);
}

TEST_CASE("analytic gradients match finite differences across 20 seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MlpModel m = MlpModel::random({4, 8, 8, 2}, seed);
    Rng rng(mix_seed(seed, 77));
    Eigen::VectorXd x(4), t(2);
    for (int i = 0; i < 4; ++i) x(i) = rng.uniform(-2.0, 2.0);
    for (int i = 0; i < 2; ++i) t(i) = rng.uniform(-2.0, 2.0);
    CHECK(grad_check(m, x, t) < 1e-4);
  }
}

TEST_CASE("gradient vanishes at a perfect fit") {
  MlpModel m = MlpModel::zeros({2, 2});
  m.weights[0] << 1.0, 2.0, 3.0, 4.0;
  const Eigen::VectorXd x = Eigen::Vector2d(0.5, -0.25);
  const Eigen::VectorXd t = m.forward(x);
  MlpModel::Tape tape;
  MlpGrads g = MlpGrads::zeros_like(m);
  const Eigen::MatrixXd err = m.forward(x, tape) - t;
  mlp_backward(m, tape, 2.0 * err, g);
  CHECK(g.weights[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.biases[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear model on one point reaches the optimum") {
  // Model y = w x + b on data (1, 2): any w + b = 2 is optimal, and Adam
  // moves both parameters identically from zero, so w = b = 1.
  MlpModel m = MlpModel::zeros({1, 1});
  Eigen::MatrixXd X(1, 1), Y(1, 1);
  X << 1.0;
  Y << 2.0;
  TrainConfig cfg{.learning_rate = 0.05, .batch_size = 1, .max_epochs = 500,
                  .patience = 500, .seed = 0};
  mlp_fit(m, X, Y, cfg);
  CHECK(m.forward(Eigen::VectorXd::Ones(1))(0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(m.weights[0](0, 0) == doctest::Approx(m.biases[0](0)).epsilon(1e-9));
}

TEST_CASE("masked outputs do not influence training") {
  // Second output row carries huge garbage targets but is fully masked out.
  Rng rng(9);
  const int n = 64;
  Eigen::MatrixXd X(1, n), Y(2, n), mask(2, n);
  for (int i = 0; i < n; ++i) {
    X(0, i) = rng.uniform(-1.0, 1.0);
    Y(0, i) = 3.0 * X(0, i);
    Y(1, i) = 1e6;
    mask(0, i) = 1.0;
    mask(1, i) = 0.0;
  }
  MlpModel m = MlpModel::random({1, 8, 2}, 4);
  TrainConfig cfg{.learning_rate = 0.01, .batch_size = 32, .max_epochs = 300,
                  .patience = 50, .seed = 2};
  const FitResult r = mlp_fit(m, X, Y, cfg, &mask);
  CHECK(r.final_loss() < 1e-2);
  // The first output learned the mapping; the masked one was free to drift
  // but must stay finite.
  const Eigen::VectorXd out = m.forward(Eigen::VectorXd::Constant(1, 0.5));
  CHECK(out(0) == doctest::Approx(1.5).epsilon(0.05));
  CHECK(std::isfinite(out(1)));
}

TEST_CASE("fit is deterministic in the seed") {
  auto train = [](std::uint64_t seed) {
    MlpModel m = MlpModel::random({2, 8, 1}, 11);
    TrainConfig cfg{.learning_rate = 0.01, .batch_size = 16, .max_epochs = 50,
                    .patience = 50, .seed = seed};
    Rng rng(1);
    Eigen::MatrixXd X(2, 40), Y(1, 40);
    for (int i = 0; i < 40; ++i) {
      X(0, i) = rng.uniform(-1, 1);
      X(1, i) = rng.uniform(-1, 1);
      Y(0, i) = X(0, i) * X(1, i);
    }
    mlp_fit(m, X, Y, cfg);
    return m;
  };
  const MlpModel a = train(5), b = train(5), c = train(6);
  CHECK((a.weights[1] - b.weights[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.weights[1] - c.weights[1]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("non-finite targets are rejected") {
  MlpModel m = MlpModel::random({1, 4, 1}, 0);
  Eigen::MatrixXd X(1, 2), Y(1, 2);
  X << 0.0, 1.0;
  Y << 1.0, std::nan("");
  TrainConfig cfg;
  CHECK_THROWS_AS(mlp_fit(m, X, Y, cfg), std::invalid_argument);
}

TEST_CASE("feature scaler standardizes and guards constant features") {
  Eigen::MatrixXd X(2, 4);
  X << 1.0, 2.0, 3.0, 4.0,
       7.0, 7.0, 7.0, 7.0;
  FeatureScaler s;
  s.fit(X);
  CHECK(s.mean(0) == doctest::Approx(2.5));
  CHECK(s.stddev(1) == 1.0);  // constant feature guard
  const Eigen::MatrixXd Z = s.apply(X);
  CHECK(Z.row(0).mean() == doctest::Approx(0.0));
  CHECK(Z.row(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("save/load round trip is exact") {
  const MlpModel m = MlpModel::random({3, 5, 2}, 13);
  std::stringstream ss;
  save_mlp(ss, m);
  const MlpModel r = load_mlp(ss);
  REQUIRE(r.num_layers() == m.num_layers());
  for (int l = 0; l < m.num_layers(); ++l) {
    CHECK((r.weights[l] - m.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.biases[l] - m.biases[l]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_SUITE_END();

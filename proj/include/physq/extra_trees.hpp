#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace physq {

struct TreeParams {
  int n_estimators = 100;
  int min_samples_split = 3;
  int min_samples_leaf = 1;

  void validate() const;
};

/// Extremely randomized trees for regression. Each tree is grown on the full
/// sample; at each node, thresholds are drawn uniformly at random within the
/// feature range for sqrt(d) randomly chosen candidate features and the best
/// by variance reduction is kept.
struct TreeEnsembleModel {
  struct Node {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;      // leaf mean
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  TreeParams params;
  std::vector<Tree> trees;
};

// inputs: samples x features (row-major samples). Deterministic given seed.
TreeEnsembleModel trees_fit(const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& targets,
                            const TreeParams& params, std::uint64_t seed);

double trees_predict(const TreeEnsembleModel& model, const Eigen::VectorXd& input);

void save_trees(std::ostream& os, const TreeEnsembleModel& model);
TreeEnsembleModel load_trees(std::istream& is);

}  // namespace physq

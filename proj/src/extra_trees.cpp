#include "physq/extra_trees.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "physq/rng.hpp"

namespace physq {

void TreeParams::validate() const {
  if (n_estimators < 1) throw std::invalid_argument("TreeParams: n_estimators < 1");
  if (min_samples_split < 2) throw std::invalid_argument("TreeParams: min_samples_split < 2");
  if (min_samples_leaf < 1) throw std::invalid_argument("TreeParams: min_samples_leaf < 1");
}

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const TreeParams& params;
  Rng& rng;
  int n_candidates;
  TreeEnsembleModel::Tree tree;

  double mean_of(const std::vector<int>& idx) const {
    double s = 0.0;
    for (int i : idx) s += y(i);
    return s / idx.size();
  }

  // Sum of squared deviations from the mean.
  double sse_of(const std::vector<int>& idx) const {
    const double m = mean_of(idx);
    double s = 0.0;
    for (int i : idx) s += (y(i) - m) * (y(i) - m);
    return s;
  }

  int make_leaf(const std::vector<int>& idx) {
    TreeEnsembleModel::Node node;
    node.value = mean_of(idx);
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  int build(const std::vector<int>& idx) {
    const int n = static_cast<int>(idx.size());
    if (n < params.min_samples_split) return make_leaf(idx);

    bool constant_y = true;
    for (int i : idx)
      if (y(i) != y(idx[0])) { constant_y = false; break; }
    if (constant_y) return make_leaf(idx);

    // Candidate features with non-zero range in this node.
    const int d = static_cast<int>(X.cols());
    std::vector<int> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    for (int i = d - 1; i > 0; --i)
      std::swap(feats[i], feats[rng.uniform_int(i + 1)]);

    int best_feature = -1;
    double best_threshold = 0.0, best_score = -1.0;
    int tried = 0;
    for (int f : feats) {
      if (tried >= n_candidates) break;
      double lo = X(idx[0], f), hi = lo;
      for (int i : idx) {
        lo = std::min(lo, X(i, f));
        hi = std::max(hi, X(i, f));
      }
      if (hi <= lo) continue;  // constant feature, not a usable candidate
      ++tried;
      const double thr = rng.uniform(lo, hi);
      std::vector<int> left, right;
      for (int i : idx) (X(i, f) < thr ? left : right).push_back(i);
      if (static_cast<int>(left.size()) < params.min_samples_leaf ||
          static_cast<int>(right.size()) < params.min_samples_leaf)
        continue;
      const double score = sse_of(idx) - sse_of(left) - sse_of(right);
      if (score > best_score) {
        best_score = score;
        best_feature = f;
        best_threshold = thr;
      }
    }
    if (best_feature < 0) return make_leaf(idx);

    std::vector<int> left, right;
    for (int i : idx) (X(i, best_feature) < best_threshold ? left : right).push_back(i);
    TreeEnsembleModel::Node node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    const int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);
    tree.nodes[self].left = build(left);
    tree.nodes[self].right = build(right);
    return self;
  }
};

}  // namespace

TreeEnsembleModel trees_fit(const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& targets,
                            const TreeParams& params, std::uint64_t seed) {
  params.validate();
  const int n = static_cast<int>(inputs.rows());
  if (n == 0) throw std::invalid_argument("trees_fit: empty dataset");
  if (targets.size() != n) throw std::invalid_argument("trees_fit: inputs/targets size mismatch");

  TreeEnsembleModel model;
  model.params = params;
  Rng rng(mix_seed(seed, 0x7265));
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  const int n_candidates =
      std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(inputs.cols())))));
  for (int t = 0; t < params.n_estimators; ++t) {
    TreeBuilder builder{inputs, targets, params, rng, n_candidates, {}};
    builder.build(all);
    model.trees.push_back(std::move(builder.tree));
  }
  return model;
}

double trees_predict(const TreeEnsembleModel& model, const Eigen::VectorXd& input) {
  if (model.trees.empty()) throw std::invalid_argument("trees_predict: unfitted model");
  double sum = 0.0;
  for (const auto& tree : model.trees) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
      const auto& nd = tree.nodes[node];
      node = input(nd.feature) < nd.threshold ? nd.left : nd.right;
    }
    sum += tree.nodes[node].value;
  }
  return sum / model.trees.size();
}

void save_trees(std::ostream& os, const TreeEnsembleModel& model) {
  os.precision(17);
  os << "extra-trees " << model.trees.size() << ' ' << model.params.n_estimators
     << ' ' << model.params.min_samples_split << ' ' << model.params.min_samples_leaf << '\n';
  for (const auto& tree : model.trees) {
    os << tree.nodes.size() << '\n';
    for (const auto& nd : tree.nodes)
      os << nd.feature << ' ' << nd.threshold << ' ' << nd.left << ' ' << nd.right
         << ' ' << nd.value << '\n';
  }
}

TreeEnsembleModel load_trees(std::istream& is) {
  std::string tag;
  std::size_t n_trees = 0;
  TreeEnsembleModel model;
  if (!(is >> tag >> n_trees >> model.params.n_estimators >>
        model.params.min_samples_split >> model.params.min_samples_leaf) ||
      tag != "extra-trees")
    throw std::runtime_error("load_trees: bad header");
  model.trees.resize(n_trees);
  for (auto& tree : model.trees) {
    std::size_t n_nodes = 0;
    if (!(is >> n_nodes)) throw std::runtime_error("load_trees: truncated tree");
    tree.nodes.resize(n_nodes);
    for (auto& nd : tree.nodes)
      if (!(is >> nd.feature >> nd.threshold >> nd.left >> nd.right >> nd.value))
        throw std::runtime_error("load_trees: truncated node");
  }
  return model;
}

}  // namespace physq

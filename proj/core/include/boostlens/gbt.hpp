#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boostlens/dataset.hpp"

namespace boostlens::gbt {

struct TrainConfig {
  int num_rounds = 60;
  double learning_rate = 0.3;
  int max_depth = 4;
  double lambda = 1.0;  // L2 penalty on leaf weights
  double gamma = 0.0;   // per-split penalty; also the pruning threshold
  int min_child_rows = 1;
  std::uint64_t seed = 0;
  int threads = 1;  // split search workers; results are thread-count invariant

  void validate() const;
};

struct GradHess {
  double g = 0.0;
  double h = 0.0;
};

struct GradHessSum {
  double grad = 0.0;
  double hess = 0.0;
  std::size_t rows = 0;

  void add(const GradHess& gh) {
    grad += gh.g;
    hess += gh.h;
    ++rows;
  }
  void merge(const GradHessSum& o) {
    grad += o.grad;
    hess += o.hess;
    rows += o.rows;
  }
};

double sigmoid(double x);

/// Gradient and hessian of the logistic loss at a margin: g = p - label,
/// h = p(1-p) with p = sigmoid(margin).
GradHess logistic_grad_hess(double margin, int label);

/// Optimal leaf output -G/(H + lambda). Throws on H + lambda <= 0.
double leaf_weight(const GradHessSum& acc, double lambda);

/// Objective reduction of a split minus gamma:
/// (G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)) / 2 - gamma.
double split_gain(const GradHessSum& left, const GradHessSum& right, double lambda,
                  double gamma);

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;     // leaf output, log-odds units
  double gain = 0.0;       // growth-time split gain (internal nodes)
  std::size_t cover = 0;   // training rows reaching this node
  double sum_grad = 0.0;   // node gradient totals, kept so pruning can
  double sum_hess = 0.0;   // recompute gains and merged leaf weights

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // preorder, nodes[0] is the root
  double lambda = 1.0;          // growth-time regularizer, reused by pruning

  double predict(std::span<const double> row) const;
  std::size_t leaf_for(std::span<const double> row) const;
  std::vector<int> distinct_features() const;
};

struct Ensemble {
  std::vector<DecisionTree> trees;
  double base_margin = 0.0;
  double learning_rate = 1.0;
  std::vector<std::string> feature_names;

  double predict_margin(std::span<const double> row) const;
  double predict_proba(std::span<const double> row) const;
};

/// Exact greedy search over every feature and every midpoint between
/// consecutive distinct sorted values. Returns the maximum-gain split
/// (ties: lowest feature index, then lowest threshold) or nullopt when no
/// candidate has positive gain or satisfies min_child_rows.
std::optional<Split> find_best_split(std::span<const std::size_t> rows,
                                     const FeatureMatrix& features,
                                     std::span<const GradHess> grad,
                                     const TrainConfig& config);

/// Depth-first recursive growth until max_depth, min_child_rows, or no
/// positive-gain split remains. Rows with value < threshold go left.
DecisionTree grow_tree(std::span<const GradHess> grad, const FeatureMatrix& features,
                       const TrainConfig& config);

/// Collapses every internal node whose recomputed gain (at this gamma) is
/// <= 0 into a leaf weighted from its merged gradient totals. Idempotent.
DecisionTree prune_tree(const DecisionTree& tree, double gamma);

/// Newton boosting from a zero base margin: exactly num_rounds trees, each
/// grown on the current gradients, pruned, and applied at the learning rate.
/// Throws DataError when labels contain a single class.
Ensemble train(const FeatureMatrix& features, const LabelVector& labels,
               const TrainConfig& config);

/// Mean logistic loss of the ensemble on a dataset.
double log_loss(const Ensemble& model, const FeatureMatrix& features,
                const LabelVector& labels);

}  // namespace boostlens::gbt

#include "boostlens/gbt.hpp"

#include <algorithm>
#include <cmath>

#include "boostlens/parallel.hpp"

namespace boostlens::gbt {

void TrainConfig::validate() const {
  if (num_rounds < 0) throw ConfigError("TrainConfig: num_rounds must be >= 0");
  if (!(learning_rate > 0.0) || learning_rate > 1.0) {
    throw ConfigError("TrainConfig: learning_rate must lie in (0, 1]");
  }
  if (max_depth < 0) throw ConfigError("TrainConfig: max_depth must be >= 0");
  if (lambda < 0.0) throw ConfigError("TrainConfig: lambda must be >= 0");
  if (gamma < 0.0) throw ConfigError("TrainConfig: gamma must be >= 0");
  if (min_child_rows < 1) throw ConfigError("TrainConfig: min_child_rows must be >= 1");
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GradHess logistic_grad_hess(double margin, int label) {
  const double p = sigmoid(margin);
  return {p - static_cast<double>(label), p * (1.0 - p)};
}

double leaf_weight(const GradHessSum& acc, double lambda) {
  const double denom = acc.hess + lambda;
  if (!(denom > 0.0)) throw ModelError("leaf_weight: H + lambda must be positive");
  return -acc.grad / denom;
}

double split_gain(const GradHessSum& left, const GradHessSum& right, double lambda,
                  double gamma) {
  const double gl = left.grad, hl = left.hess;
  const double gr = right.grad, hr = right.hess;
  const double score_left = gl * gl / (hl + lambda);
  const double score_right = gr * gr / (hr + lambda);
  const double score_parent = (gl + gr) * (gl + gr) / (hl + hr + lambda);
  return 0.5 * (score_left + score_right - score_parent) - gamma;
}

double DecisionTree::predict(std::span<const double> row) const {
  return nodes[leaf_for(row)].weight;
}

std::size_t DecisionTree::leaf_for(std::span<const double> row) const {
  std::size_t idx = 0;
  while (!nodes[idx].is_leaf()) {
    const auto& node = nodes[idx];
    idx = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] < node.threshold
                                       ? node.left
                                       : node.right);
  }
  return idx;
}

std::vector<int> DecisionTree::distinct_features() const {
  std::vector<int> out;
  for (const auto& node : nodes) {
    if (!node.is_leaf() && std::find(out.begin(), out.end(), node.feature) == out.end()) {
      out.push_back(node.feature);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double Ensemble::predict_margin(std::span<const double> row) const {
  if (row.size() != feature_names.size()) {
    throw ModelError("predict: row has " + std::to_string(row.size()) + " features, model expects " +
                     std::to_string(feature_names.size()));
  }
  double margin = base_margin;
  for (const auto& tree : trees) margin += learning_rate * tree.predict(row);
  return margin;
}

double Ensemble::predict_proba(std::span<const double> row) const {
  return sigmoid(predict_margin(row));
}

namespace {

/// Best split for a single feature, or nullopt. Candidates violating
/// min_child_rows are skipped during enumeration, not after.
std::optional<Split> best_split_for_feature(int feature, std::span<const std::size_t> rows,
                                            const FeatureMatrix& features,
                                            std::span<const GradHess> grad,
                                            const TrainConfig& config,
                                            const GradHessSum& total) {
  thread_local std::vector<std::pair<double, std::size_t>> sorted;
  sorted.clear();
  sorted.reserve(rows.size());
  for (std::size_t r : rows) {
    sorted.emplace_back(features.at(r, static_cast<std::size_t>(feature)), r);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::optional<Split> best;
  GradHessSum left;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    left.add(grad[sorted[i].second]);
    if (sorted[i].first == sorted[i + 1].first) continue;  // same value group
    if (left.rows < static_cast<std::size_t>(config.min_child_rows)) continue;
    if (rows.size() - left.rows < static_cast<std::size_t>(config.min_child_rows)) continue;
    const double threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
    if (!(threshold > sorted[i].first)) continue;  // midpoint rounded onto the left value
    GradHessSum right{total.grad - left.grad, total.hess - left.hess, rows.size() - left.rows};
    const double gain = split_gain(left, right, config.lambda, config.gamma);
    if (!best || gain > best->gain) {
      best = Split{feature, threshold, gain};
    }
  }
  return best;
}

}  // namespace

std::optional<Split> find_best_split(std::span<const std::size_t> rows,
                                     const FeatureMatrix& features,
                                     std::span<const GradHess> grad,
                                     const TrainConfig& config) {
  if (rows.empty()) throw ModelError("find_best_split: empty row subset");
  GradHessSum total;
  for (std::size_t r : rows) total.add(grad[r]);

  const std::size_t n_features = features.col_count();
  std::vector<std::optional<Split>> per_feature(n_features);
  parallel_for(n_features, config.threads, [&](std::size_t f) {
    per_feature[f] =
        best_split_for_feature(static_cast<int>(f), rows, features, grad, config, total);
  });

  // Fixed-order reduction: lowest feature index wins ties, and within one
  // feature the scan already kept the lowest threshold.
  std::optional<Split> best;
  for (const auto& cand : per_feature) {
    if (cand && (!best || cand->gain > best->gain)) best = cand;
  }
  if (!best || !(best->gain > 0.0)) return std::nullopt;
  return best;
}

namespace {

void grow_node(DecisionTree& tree, std::vector<std::size_t>& rows, std::size_t node_idx,
               int depth, const FeatureMatrix& features, std::span<const GradHess> grad,
               const TrainConfig& config) {
  GradHessSum total;
  for (std::size_t r : rows) total.add(grad[r]);

  auto& node = tree.nodes[node_idx];
  node.cover = rows.size();
  node.sum_grad = total.grad;
  node.sum_hess = total.hess;

  const bool can_split = depth < config.max_depth &&
                         rows.size() >= 2 * static_cast<std::size_t>(config.min_child_rows);
  std::optional<Split> split;
  if (can_split) split = find_best_split(rows, features, grad, config);
  if (!split) {
    node.feature = -1;
    node.weight = leaf_weight(total, config.lambda);
    return;
  }

  std::vector<std::size_t> left_rows, right_rows;
  left_rows.reserve(rows.size());
  for (std::size_t r : rows) {
    if (features.at(r, static_cast<std::size_t>(split->feature)) < split->threshold) {
      left_rows.push_back(r);
    } else {
      right_rows.push_back(r);
    }
  }
  rows.clear();
  rows.shrink_to_fit();

  const int left_idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  // Preorder: the whole left subtree is laid out before the right child.
  {
    auto& n = tree.nodes[node_idx];
    n.feature = split->feature;
    n.threshold = split->threshold;
    n.gain = split->gain;
    n.left = left_idx;
  }
  grow_node(tree, left_rows, static_cast<std::size_t>(left_idx), depth + 1, features, grad,
            config);
  const int right_idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes[node_idx].right = right_idx;
  grow_node(tree, right_rows, static_cast<std::size_t>(right_idx), depth + 1, features, grad,
            config);
}

}  // namespace

DecisionTree grow_tree(std::span<const GradHess> grad, const FeatureMatrix& features,
                       const TrainConfig& config) {
  config.validate();
  if (grad.size() != features.row_count) {
    throw ModelError("grow_tree: gradient array does not match the matrix rows");
  }
  if (features.row_count == 0) throw ModelError("grow_tree: no rows");
  DecisionTree tree;
  tree.lambda = config.lambda;
  tree.nodes.emplace_back();
  std::vector<std::size_t> rows(features.row_count);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  grow_node(tree, rows, 0, 0, features, grad, config);
  return tree;
}

namespace {

int copy_pruned(const DecisionTree& src, std::size_t node_idx, double gamma,
                DecisionTree& dst) {
  const auto& node = src.nodes[node_idx];
  const int out_idx = static_cast<int>(dst.nodes.size());
  dst.nodes.push_back(node);
  if (node.is_leaf()) return out_idx;

  const auto& left = src.nodes[static_cast<std::size_t>(node.left)];
  const auto& right = src.nodes[static_cast<std::size_t>(node.right)];
  const GradHessSum ls{left.sum_grad, left.sum_hess, left.cover};
  const GradHessSum rs{right.sum_grad, right.sum_hess, right.cover};
  const double gain = split_gain(ls, rs, src.lambda, gamma);
  if (!(gain > 0.0)) {
    // Collapse the whole subtree into a leaf built from the merged totals.
    auto& out = dst.nodes[static_cast<std::size_t>(out_idx)];
    out.feature = -1;
    out.threshold = 0.0;
    out.left = out.right = -1;
    out.gain = 0.0;
    out.weight = leaf_weight(GradHessSum{node.sum_grad, node.sum_hess, node.cover}, src.lambda);
    return out_idx;
  }
  dst.nodes[static_cast<std::size_t>(out_idx)].gain = gain;
  const int l = copy_pruned(src, static_cast<std::size_t>(node.left), gamma, dst);
  const int r = copy_pruned(src, static_cast<std::size_t>(node.right), gamma, dst);
  dst.nodes[static_cast<std::size_t>(out_idx)].left = l;
  dst.nodes[static_cast<std::size_t>(out_idx)].right = r;
  return out_idx;
}

}  // namespace

DecisionTree prune_tree(const DecisionTree& tree, double gamma) {
  if (tree.nodes.empty()) throw ModelError("prune_tree: empty tree");
  DecisionTree out;
  out.lambda = tree.lambda;
  copy_pruned(tree, 0, gamma, out);
  return out;
}

Ensemble train(const FeatureMatrix& features, const LabelVector& labels,
               const TrainConfig& config) {
  config.validate();
  if (labels.size() != features.row_count) {
    throw DataError("train: labels do not match the matrix rows");
  }
  if (features.row_count == 0) throw DataError("train: no rows");
  bool has_pos = false, has_neg = false;
  for (int y : labels.values) {
    if (y == 1) has_pos = true;
    else if (y == 0) has_neg = true;
    else throw DataError("train: labels must be 0 or 1");
  }
  if (!has_pos || !has_neg) {
    throw DataError("train: both classes must be present in the labels");
  }

  Ensemble model;
  model.base_margin = 0.0;
  model.learning_rate = config.learning_rate;
  model.feature_names = features.names;

  const std::size_t M = features.row_count;
  std::vector<double> margins(M, model.base_margin);
  std::vector<GradHess> grad(M);
  for (int round = 0; round < config.num_rounds; ++round) {
    for (std::size_t i = 0; i < M; ++i) {
      grad[i] = logistic_grad_hess(margins[i], labels.values[i]);
    }
    DecisionTree tree = prune_tree(grow_tree(grad, features, config), config.gamma);
    for (std::size_t i = 0; i < M; ++i) {
      margins[i] += config.learning_rate * tree.predict(features.row(i));
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double log_loss(const Ensemble& model, const FeatureMatrix& features,
                const LabelVector& labels) {
  if (labels.size() != features.row_count || features.row_count == 0) {
    throw DataError("log_loss: labels do not match the matrix rows");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < features.row_count; ++i) {
    const double m = model.predict_margin(features.row(i));
    const double y = labels.values[i];
    // log(1 + e^m) - y*m, written to stay finite for large |m|.
    const double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    total += softplus - y * m;
  }
  return total / static_cast<double>(features.row_count);
}

}  // namespace boostlens::gbt

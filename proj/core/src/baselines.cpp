#include "boostlens/baselines.hpp"

#include <cmath>

namespace boostlens::baselines {

double LinearModel::margin(std::span<const double> row) const {
  if (row.size() != weights.size()) {
    throw ModelError("LinearModel: row has " + std::to_string(row.size()) +
                     " features, model expects " + std::to_string(weights.size()));
  }
  double m = bias;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    m += weights[c] * (row[c] - mean[c]) / scale[c];
  }
  return m;
}

double LinearModel::proba(std::span<const double> row) const {
  return gbt::sigmoid(margin(row));
}

double LogisticObjective::loss(std::span<const double> weights, double bias) const {
  const std::size_t M = x.row_count;
  double total = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    double m = bias;
    const auto row = x.row(i);
    for (std::size_t c = 0; c < weights.size(); ++c) m += weights[c] * row[c];
    const double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    total += softplus - y.values[i] * m;
  }
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return total / static_cast<double>(M) + 0.5 * l2 * reg / static_cast<double>(M);
}

void LogisticObjective::gradient(std::span<const double> weights, double bias,
                                 std::vector<double>& grad_w, double& grad_b) const {
  const std::size_t M = x.row_count;
  grad_w.assign(weights.size(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    double m = bias;
    const auto row = x.row(i);
    for (std::size_t c = 0; c < weights.size(); ++c) m += weights[c] * row[c];
    const double resid = gbt::sigmoid(m) - y.values[i];
    for (std::size_t c = 0; c < weights.size(); ++c) grad_w[c] += resid * row[c];
    grad_b += resid;
  }
  for (std::size_t c = 0; c < weights.size(); ++c) {
    grad_w[c] = grad_w[c] / static_cast<double>(M) + l2 * weights[c] / static_cast<double>(M);
  }
  grad_b /= static_cast<double>(M);
}

LinearModel train_logistic(const FeatureMatrix& matrix, const LabelVector& labels,
                           double l2, int iters, double step) {
  std::vector<double> trace;
  return train_logistic(matrix, labels, l2, iters, step, trace);
}

LinearModel train_logistic(const FeatureMatrix& matrix, const LabelVector& labels,
                           double l2, int iters, double step,
                           std::vector<double>& loss_trace) {
  if (labels.size() != matrix.row_count) {
    throw DataError("train_logistic: labels do not match the matrix rows");
  }
  if (matrix.row_count == 0) throw DataError("train_logistic: no rows");
  if (l2 < 0) throw ConfigError("train_logistic: l2 must be >= 0");
  if (iters < 1) throw ConfigError("train_logistic: iters must be >= 1");
  if (!(step > 0)) throw ConfigError("train_logistic: step must be positive");
  bool has_pos = false, has_neg = false;
  for (int v : labels.values) (v == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw DataError("train_logistic: both classes must be present in the labels");
  }

  const std::size_t n = matrix.col_count();
  const std::size_t M = matrix.row_count;

  LinearModel model;
  model.l2 = l2;
  model.feature_names = matrix.names;
  model.mean.assign(n, 0.0);
  model.scale.assign(n, 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    double mu = 0.0;
    for (std::size_t r = 0; r < M; ++r) mu += matrix.at(r, c);
    mu /= static_cast<double>(M);
    double var = 0.0;
    for (std::size_t r = 0; r < M; ++r) {
      const double d = matrix.at(r, c) - mu;
      var += d * d;
    }
    var /= static_cast<double>(M);
    model.mean[c] = mu;
    model.scale[c] = var > 0 ? std::sqrt(var) : 1.0;
  }

  FeatureMatrix z;
  z.names = matrix.names;
  z.row_count = M;
  z.values.resize(M * n);
  for (std::size_t r = 0; r < M; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      z.at(r, c) = (matrix.at(r, c) - model.mean[c]) / model.scale[c];
    }
  }

  const LogisticObjective objective{z, labels, l2};
  std::vector<double> w(n, 0.0);
  double b = 0.0;
  double loss = objective.loss(w, b);
  loss_trace.clear();
  loss_trace.push_back(loss);

  std::vector<double> grad_w;
  double grad_b = 0.0;
  std::vector<double> cand(n);
  for (int it = 0; it < iters; ++it) {
    objective.gradient(w, b, grad_w, grad_b);
    double s = step;
    bool accepted = false;
    while (s > 1e-12) {
      for (std::size_t c = 0; c < n; ++c) cand[c] = w[c] - s * grad_w[c];
      const double cand_b = b - s * grad_b;
      const double cand_loss = objective.loss(cand, cand_b);
      if (cand_loss <= loss) {
        w = cand;
        b = cand_b;
        loss = cand_loss;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    loss_trace.push_back(loss);
    if (!accepted) break;  // no decreasing step left; converged
  }

  model.weights = std::move(w);
  model.bias = b;
  return model;
}

double CartModel::margin(std::span<const double> row) const {
  if (row.size() != feature_names.size()) {
    throw ModelError("CartModel: row has " + std::to_string(row.size()) +
                     " features, model expects " + std::to_string(feature_names.size()));
  }
  return tree.predict(row);
}

double CartModel::proba(std::span<const double> row) const {
  return gbt::sigmoid(margin(row));
}

CartModel train_cart(const FeatureMatrix& matrix, const LabelVector& labels,
                     const gbt::TrainConfig& config) {
  gbt::TrainConfig single = config;
  single.num_rounds = 1;
  single.learning_rate = 1.0;
  const gbt::Ensemble model = gbt::train(matrix, labels, single);
  return CartModel{model.trees.front(), model.feature_names};
}

}  // namespace boostlens::baselines

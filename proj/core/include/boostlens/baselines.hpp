#pragma once

#include <span>
#include <string>
#include <vector>

#include "boostlens/dataset.hpp"
#include "boostlens/gbt.hpp"

namespace boostlens::baselines {

/// L2-regularized logistic regression over internally z-scored features.
/// The scaling parameters are stored so prediction is self-contained.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2 = 0.0;
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<std::string> feature_names;

  double margin(std::span<const double> row) const;
  double proba(std::span<const double> row) const;
};

/// Training objective for the linear model, exposed so gradients can be
/// checked against finite differences. Operates on the matrix as given;
/// train_logistic standardizes before constructing one.
struct LogisticObjective {
  const FeatureMatrix& x;
  const LabelVector& y;
  double l2 = 0.0;

  double loss(std::span<const double> weights, double bias) const;
  void gradient(std::span<const double> weights, double bias,
                std::vector<double>& grad_w, double& grad_b) const;
};

/// Full-batch gradient descent with step halving on any loss increase, so the
/// recorded loss sequence is non-increasing. Throws on single-class labels.
LinearModel train_logistic(const FeatureMatrix& matrix, const LabelVector& labels,
                           double l2, int iters, double step);

/// Loss after each accepted iteration of the most recent train_logistic call
/// is returned through this overload.
LinearModel train_logistic(const FeatureMatrix& matrix, const LabelVector& labels,
                           double l2, int iters, double step,
                           std::vector<double>& loss_trace);

/// A single classification tree: one boosting round at learning rate 1,
/// reusing the gbt split machinery on the round-zero gradients.
struct CartModel {
  gbt::DecisionTree tree;
  std::vector<std::string> feature_names;

  double margin(std::span<const double> row) const;
  double proba(std::span<const double> row) const;
};

CartModel train_cart(const FeatureMatrix& matrix, const LabelVector& labels,
                     const gbt::TrainConfig& config);

}  // namespace boostlens::baselines

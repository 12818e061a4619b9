#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "boostlens/dataset.hpp"
#include "boostlens/gbt.hpp"

namespace boostlens::explain {

/// A subset of feature indices inside a fixed universe of size n (n <= 32).
struct Coalition {
  std::uint32_t mask = 0;
  int universe = 0;

  bool contains(int i) const { return (mask >> i) & 1u; }
  Coalition with(int i) const { return {mask | (1u << i), universe}; }
  int size() const { return std::popcount(mask); }
  static Coalition empty_set(int n) { return {0, n}; }
  static Coalition full_set(int n) {
    return {n >= 32 ? ~0u : ((1u << n) - 1u), n};
  }
};

using CoalitionValueFn = std::function<double(const Coalition&)>;

struct ShapVector {
  std::vector<double> phi;  // log-odds units, one entry per feature
  double base = 0.0;        // expected margin with no features known

  double margin() const;  // base + sum of phi
};

/// Symmetric pairwise attributions. The diagonal carries the residual main
/// effect phi_i - sum_{j!=i} phi_ij, so every row sums to the feature's phi.
struct InteractionMatrix {
  int n = 0;
  std::vector<double> values;  // n x n, row-major

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
  std::vector<double> row_sums() const;
};

/// Coefficient family for the pairwise sum over S (universe size n):
///   factorial_n    |S|! (n-|S|-2)! / n!
///   pair_shapley   |S|! (n-|S|-2)! / (2 (n-1)!)
/// The two differ by a factor of 2/n; pair_shapley is the scaling under
/// which the off-diagonals of an additive decomposition are halved shares.
enum class InteractionWeighting { factorial_n, pair_shapley };

struct ExplainConfig {
  int exact_cap = 15;             // largest universe for full 2^n enumeration
  int per_tree_feature_cap = 20;  // max distinct features in any one tree
  InteractionWeighting weighting = InteractionWeighting::factorial_n;
  int threads = 1;                // batch helpers only; per-row math is serial
};

/// Expected margin when only the coalition's features are known: per tree,
/// follow the row's branch at known features and average both children by
/// their training-cover fractions everywhere else.
double coalition_value(const gbt::Ensemble& model, std::span<const double> row,
                       const Coalition& coalition);

/// Full 2^n enumeration of the Shapley formula for an arbitrary value
/// function. Throws ConfigError when n exceeds the cap.
ShapVector shapley_exact(const CoalitionValueFn& value, int n, int cap = 15);

/// Exact Shapley values of the ensemble's coalition game. Trees contribute
/// independently, and inside a tree only the features on a leaf's path can
/// matter, so the enumeration runs over those small universes; the result
/// equals shapley_exact on coalition_value.
ShapVector shap_values(const gbt::Ensemble& model, std::span<const double> row,
                       const ExplainConfig& config = {});

/// Pairwise attributions by second differences over the same coalition game,
/// restricted per tree exactly like shap_values.
InteractionMatrix shap_interactions(const gbt::Ensemble& model, std::span<const double> row,
                                    const ExplainConfig& config = {});

struct BaseValue {
  double margin = 0.0;
  double probability = 0.5;
};

/// Mean prediction over a dataset, on both output scales.
BaseValue base_value(const gbt::Ensemble& model, const FeatureMatrix& matrix);

}  // namespace boostlens::explain

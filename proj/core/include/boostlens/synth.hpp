#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "boostlens/dataset.hpp"

namespace boostlens {

/// Per-column sampling distribution. Which field applies depends on the
/// column kind; anything unset falls back to a built-in default.
struct Marginal {
  std::vector<double> level_probs;  // likert7 (7 entries) or category levels
  double yes_prob = 0.5;            // yes_no columns
  std::vector<double> count_probs;  // count columns: P(value == index)
};

/// Two columns generated with a target product-moment correlation.
struct PlantedPair {
  std::string a;
  std::string b;
  double r = 0.0;
};

/// Pairwise term of the ground-truth logit, on standardized column values.
struct InteractionTerm {
  std::string a;
  std::string b;
  double coef = 0.0;
};

struct SynthConfig {
  std::size_t rows = 2000;
  std::vector<PlantedPair> planted_pairs;
  std::vector<std::pair<std::string, double>> main_effects;  // standardized scale
  std::vector<InteractionTerm> interactions;
  double intercept = 0.0;
  double noise_sigma = 0.5;   // sd of the latent label noise
  double neutral_band = 0.1;  // |latent| <= band answers neutral (4)
  double invalid_rate = 0.0;  // fraction of rows given a screening violation
  bool emit_completion_seconds = true;
  std::map<std::string, Marginal> marginals;

  /// Trust scenario on the AV survey schema: positive Benefit and negative
  /// Risk main effects, a Benefit x BeeninAV interaction, and two highly
  /// correlated column pairs (Age/YearsDriving, Fear/Nervousness).
  static SynthConfig demo();

  static SynthConfig from_json_string(const std::string& text);
  static SynthConfig from_json_file(const std::string& path);
  std::string to_json_string() const;
};

struct SynthResult {
  SurveyDataset dataset;
  /// Ground truth per emitted row: the planted logit and the noisy latent
  /// that produced the response. Rows later corrupted for screening tests
  /// keep the truth of their clean originals.
  std::vector<double> logit;
  std::vector<double> latent;
};

/// Deterministic generator: identical (schema, config, seed) gives identical
/// output on any platform. Planted pair correlations are calibrated against
/// the generated values, so the empirical r lands within ~0.01 of the target.
SynthResult synthesize(const SurveySchema& schema, const SynthConfig& config,
                       std::uint64_t seed);
SynthResult synthesize(const SynthConfig& config, std::uint64_t seed);

}  // namespace boostlens

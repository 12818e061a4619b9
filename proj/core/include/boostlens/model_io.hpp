#pragma once

#include <string>

#include "boostlens/baselines.hpp"
#include "boostlens/gbt.hpp"

namespace boostlens::io {

/// All model files share one JSON envelope with "format", "version", and a
/// "kind" tag ("gbt", "logistic", "cart"). Doubles are written with their
/// shortest round-tripping representation, so save -> load reproduces
/// bit-identical predictions.

std::string to_json(const gbt::Ensemble& model);
gbt::Ensemble ensemble_from_json(const std::string& text);

std::string to_json(const baselines::LinearModel& model);
baselines::LinearModel linear_from_json(const std::string& text);

std::string to_json(const baselines::CartModel& model);
baselines::CartModel cart_from_json(const std::string& text);

void save_model(const gbt::Ensemble& model, const std::string& path);
void save_model(const baselines::LinearModel& model, const std::string& path);
void save_model(const baselines::CartModel& model, const std::string& path);

/// Reads the "kind" tag without fully parsing the model.
std::string model_kind(const std::string& path);

gbt::Ensemble load_ensemble(const std::string& path);
baselines::LinearModel load_linear(const std::string& path);
baselines::CartModel load_cart(const std::string& path);

}  // namespace boostlens::io

#include "boostlens/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace boostlens::io {

namespace {

constexpr const char* kFormat = "boostlens-model";
constexpr int kVersion = 1;

nlohmann::json envelope(const std::string& kind) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["kind"] = kind;
  return doc;
}

nlohmann::json parse_envelope(const std::string& text, const std::string& expected_kind) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model file: invalid JSON: ") + e.what());
  }
  if (doc.value("format", "") != kFormat) {
    throw ModelError("model file: unrecognized format tag");
  }
  if (doc.value("version", 0) != kVersion) {
    throw ModelError("model file: unsupported version " + std::to_string(doc.value("version", 0)));
  }
  const std::string kind = doc.value("kind", "");
  if (!expected_kind.empty() && kind != expected_kind) {
    throw ModelError("model file: kind is \"" + kind + "\", expected \"" + expected_kind + "\"");
  }
  return doc;
}

nlohmann::json tree_to_json(const gbt::DecisionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    nlohmann::json jn;
    if (n.is_leaf()) {
      jn["leaf"] = n.weight;
    } else {
      jn["feature"] = n.feature;
      jn["threshold"] = n.threshold;
      jn["left"] = n.left;
      jn["right"] = n.right;
      jn["gain"] = n.gain;
    }
    jn["cover"] = n.cover;
    jn["sum_grad"] = n.sum_grad;
    jn["sum_hess"] = n.sum_hess;
    nodes.push_back(std::move(jn));
  }
  nlohmann::json jt;
  jt["lambda"] = tree.lambda;
  jt["nodes"] = std::move(nodes);
  return jt;
}

gbt::DecisionTree tree_from_json(const nlohmann::json& jt) {
  gbt::DecisionTree tree;
  tree.lambda = jt.value("lambda", 1.0);
  for (const auto& jn : jt.at("nodes")) {
    gbt::TreeNode n;
    if (jn.contains("leaf")) {
      n.weight = jn["leaf"].get<double>();
    } else {
      n.feature = jn.at("feature").get<int>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
      n.gain = jn.value("gain", 0.0);
    }
    n.cover = jn.value("cover", std::size_t{0});
    n.sum_grad = jn.value("sum_grad", 0.0);
    n.sum_hess = jn.value("sum_hess", 0.0);
    tree.nodes.push_back(n);
  }
  if (tree.nodes.empty()) throw ModelError("model file: tree without nodes");
  for (const auto& n : tree.nodes) {
    if (n.is_leaf()) continue;
    const auto size = static_cast<int>(tree.nodes.size());
    if (n.left < 0 || n.right < 0 || n.left >= size || n.right >= size) {
      throw ModelError("model file: tree child index out of range");
    }
  }
  return tree;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("model file: cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("model file: cannot open for writing: " + path);
  out << text;
}

}  // namespace

std::string to_json(const gbt::Ensemble& model) {
  nlohmann::json doc = envelope("gbt");
  doc["feature_names"] = model.feature_names;
  doc["base_margin"] = model.base_margin;
  doc["learning_rate"] = model.learning_rate;
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees) trees.push_back(tree_to_json(tree));
  doc["trees"] = std::move(trees);
  return doc.dump(2) + "\n";
}

gbt::Ensemble ensemble_from_json(const std::string& text) {
  const nlohmann::json doc = parse_envelope(text, "gbt");
  gbt::Ensemble model;
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  model.base_margin = doc.at("base_margin").get<double>();
  model.learning_rate = doc.at("learning_rate").get<double>();
  for (const auto& jt : doc.at("trees")) model.trees.push_back(tree_from_json(jt));
  return model;
}

std::string to_json(const baselines::LinearModel& model) {
  nlohmann::json doc = envelope("logistic");
  doc["feature_names"] = model.feature_names;
  doc["weights"] = model.weights;
  doc["bias"] = model.bias;
  doc["l2"] = model.l2;
  doc["mean"] = model.mean;
  doc["scale"] = model.scale;
  return doc.dump(2) + "\n";
}

baselines::LinearModel linear_from_json(const std::string& text) {
  const nlohmann::json doc = parse_envelope(text, "logistic");
  baselines::LinearModel model;
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  model.weights = doc.at("weights").get<std::vector<double>>();
  model.bias = doc.at("bias").get<double>();
  model.l2 = doc.value("l2", 0.0);
  model.mean = doc.at("mean").get<std::vector<double>>();
  model.scale = doc.at("scale").get<std::vector<double>>();
  if (model.weights.size() != model.feature_names.size() ||
      model.mean.size() != model.weights.size() || model.scale.size() != model.weights.size()) {
    throw ModelError("model file: linear model arrays disagree on feature count");
  }
  return model;
}

std::string to_json(const baselines::CartModel& model) {
  nlohmann::json doc = envelope("cart");
  doc["feature_names"] = model.feature_names;
  doc["tree"] = tree_to_json(model.tree);
  return doc.dump(2) + "\n";
}

baselines::CartModel cart_from_json(const std::string& text) {
  const nlohmann::json doc = parse_envelope(text, "cart");
  baselines::CartModel model;
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  model.tree = tree_from_json(doc.at("tree"));
  return model;
}

void save_model(const gbt::Ensemble& model, const std::string& path) {
  write_file(path, to_json(model));
}
void save_model(const baselines::LinearModel& model, const std::string& path) {
  write_file(path, to_json(model));
}
void save_model(const baselines::CartModel& model, const std::string& path) {
  write_file(path, to_json(model));
}

std::string model_kind(const std::string& path) {
  return parse_envelope(read_file(path), "").value("kind", "");
}

gbt::Ensemble load_ensemble(const std::string& path) {
  return ensemble_from_json(read_file(path));
}
baselines::LinearModel load_linear(const std::string& path) {
  return linear_from_json(read_file(path));
}
baselines::CartModel load_cart(const std::string& path) {
  return cart_from_json(read_file(path));
}

}  // namespace boostlens::io

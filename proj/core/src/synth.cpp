#include "boostlens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "boostlens/rng.hpp"
#include "json.hpp"

namespace boostlens {

namespace {

constexpr double kLicensingAge = 14.0;  // youngest plausible driving age
constexpr double kStrongCut = 2.0;      // |latent| above this: extreme answer
constexpr double kModerateCut = 1.0;    // |latent| above this: moderate answer

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::size_t quantile_index(const std::vector<double>& probs, double u) {
  double total = 0.0;
  for (double p : probs) total += p;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i] / total;
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

Marginal default_marginal(const Column& col) {
  Marginal m;
  // Column-specific shapes for the AV survey; generic fallbacks otherwise.
  if (col.name == "Age") {
    m.level_probs = {0.001, 0.083, 0.377, 0.227, 0.144, 0.109, 0.059};
  } else if (col.name == "Gender") {
    m.level_probs = {0.475, 0.522, 0.003};
  } else if (col.name == "EducationLevel") {
    m.level_probs = {0.079, 0.115, 0.169, 0.433, 0.183, 0.009, 0.012};
  } else if (col.name == "Benefit") {
    m.level_probs = {0.04, 0.06, 0.10, 0.15, 0.22, 0.26, 0.17};
  } else if (col.name == "Risk") {
    m.level_probs = {0.05, 0.08, 0.13, 0.17, 0.22, 0.20, 0.15};
  } else if (col.name == "Control") {
    m.level_probs = {0.01, 0.02, 0.05, 0.10, 0.22, 0.33, 0.27};
  } else if (col.name == "BeeninAV") {
    m.yes_prob = 0.23;
  } else if (col.name == "AVAccident") {
    m.yes_prob = 0.76;
  } else if (col.name == "DrivingLicense") {
    m.yes_prob = 0.97;
  } else if (col.name == "Assess5inAV" || col.name == "Assess6to12inAV") {
    m.yes_prob = 0.11;
  } else if (col.name == "Assess13to17inAV") {
    m.yes_prob = 0.30;
  } else if (col.name == "Assess18inAV") {
    m.yes_prob = 0.86;
  } else if (col.name == "DrivingDaysPerWeek") {
    m.count_probs = {0.05, 0.05, 0.08, 0.10, 0.12, 0.20, 0.20, 0.20};
  } else {
    switch (col.kind) {
      case ColumnKind::likert7:
        m.level_probs = {0.06, 0.10, 0.16, 0.20, 0.22, 0.16, 0.10};
        break;
      case ColumnKind::yes_no:
        m.yes_prob = 0.5;
        break;
      case ColumnKind::count:
        m.count_probs.assign(11, 1.0 / 11.0);
        break;
      case ColumnKind::category: {
        m.level_probs.assign(col.codes.size(), 1.0 / static_cast<double>(col.codes.size()));
        break;
      }
    }
  }
  if (col.kind == ColumnKind::likert7 && m.level_probs.size() != 7) {
    m.level_probs = {0.06, 0.10, 0.16, 0.20, 0.22, 0.16, 0.10};
  }
  return m;
}

double safe_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return pearson_correlation(x, y);
  } catch (const DataError&) {
    return 0.0;
  }
}

struct GeneratedColumn {
  std::vector<double> values;  // numeric encoding (codes for categories)
  std::vector<std::string> cells;
};

/// Maps latent normals through the marginal's quantile function.
GeneratedColumn realize_column(const Column& col, const Marginal& m,
                               const std::vector<double>& z) {
  GeneratedColumn out;
  const std::size_t n = z.size();
  out.values.resize(n);
  out.cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = normal_cdf(z[i]);
    switch (col.kind) {
      case ColumnKind::likert7: {
        const int v = static_cast<int>(quantile_index(m.level_probs, u)) + 1;
        out.values[i] = v;
        out.cells[i] = std::to_string(v);
        break;
      }
      case ColumnKind::yes_no: {
        const bool yes = u < m.yes_prob;
        out.values[i] = yes ? 1.0 : 0.0;
        out.cells[i] = yes ? "Yes" : "No";
        break;
      }
      case ColumnKind::count: {
        const auto v = quantile_index(m.count_probs, u);
        out.values[i] = static_cast<double>(v);
        out.cells[i] = std::to_string(v);
        break;
      }
      case ColumnKind::category: {
        const auto idx = quantile_index(m.level_probs, u);
        out.values[i] = static_cast<double>(col.codes[idx].second);
        out.cells[i] = col.codes[idx].first;
        break;
      }
    }
  }
  return out;
}

int trust_level(double latent, double neutral_band) {
  if (std::abs(latent) <= neutral_band) return 4;
  if (latent > 0) {
    if (latent > kStrongCut) return 7;
    if (latent > kModerateCut) return 6;
    return 5;
  }
  if (latent < -kStrongCut) return 1;
  if (latent < -kModerateCut) return 2;
  return 3;
}

}  // namespace

SynthConfig SynthConfig::demo() {
  SynthConfig c;
  c.rows = 2000;
  c.planted_pairs = {{"Age", "YearsDriving", 0.88}, {"Fear", "Nervousness", 0.87}};
  c.main_effects = {{"Benefit", 0.9},       {"Risk", -0.9},          {"Excitement", 0.4},
                    {"KnowledgeinAVs", 0.4}, {"EagertoAdopt", 0.35}, {"BeeninAV", 0.2},
                    {"YearsDriving", -0.15}};
  c.interactions = {{"Benefit", "BeeninAV", -0.7}};
  c.noise_sigma = 0.5;
  c.neutral_band = 0.1;
  c.invalid_rate = 0.02;
  return c;
}

SynthConfig SynthConfig::from_json_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth config: invalid JSON: ") + e.what());
  }
  SynthConfig c;
  c.rows = doc.value("rows", c.rows);
  c.intercept = doc.value("intercept", c.intercept);
  c.noise_sigma = doc.value("noise_sigma", c.noise_sigma);
  c.neutral_band = doc.value("neutral_band", c.neutral_band);
  c.invalid_rate = doc.value("invalid_rate", c.invalid_rate);
  c.emit_completion_seconds = doc.value("emit_completion_seconds", c.emit_completion_seconds);
  if (doc.contains("planted_pairs")) {
    for (const auto& jp : doc["planted_pairs"]) {
      c.planted_pairs.push_back({jp.at("a").get<std::string>(), jp.at("b").get<std::string>(),
                                 jp.at("r").get<double>()});
    }
  }
  if (doc.contains("main_effects")) {
    for (const auto& [name, coef] : doc["main_effects"].items()) {
      c.main_effects.emplace_back(name, coef.get<double>());
    }
  }
  if (doc.contains("interactions")) {
    for (const auto& ji : doc["interactions"]) {
      c.interactions.push_back({ji.at("a").get<std::string>(), ji.at("b").get<std::string>(),
                                ji.at("coef").get<double>()});
    }
  }
  if (doc.contains("marginals")) {
    for (const auto& [name, jm] : doc["marginals"].items()) {
      Marginal m;
      if (jm.contains("level_probs")) m.level_probs = jm["level_probs"].get<std::vector<double>>();
      if (jm.contains("yes_prob")) m.yes_prob = jm["yes_prob"].get<double>();
      if (jm.contains("count_probs")) m.count_probs = jm["count_probs"].get<std::vector<double>>();
      c.marginals[name] = std::move(m);
    }
  }
  return c;
}

SynthConfig SynthConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("synth config: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

std::string SynthConfig::to_json_string() const {
  nlohmann::json doc;
  doc["rows"] = rows;
  doc["intercept"] = intercept;
  doc["noise_sigma"] = noise_sigma;
  doc["neutral_band"] = neutral_band;
  doc["invalid_rate"] = invalid_rate;
  doc["emit_completion_seconds"] = emit_completion_seconds;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : planted_pairs) pairs.push_back({{"a", p.a}, {"b", p.b}, {"r", p.r}});
  doc["planted_pairs"] = std::move(pairs);
  nlohmann::json mains = nlohmann::json::object();
  for (const auto& [name, coef] : main_effects) mains[name] = coef;
  doc["main_effects"] = std::move(mains);
  nlohmann::json inter = nlohmann::json::array();
  for (const auto& t : interactions) inter.push_back({{"a", t.a}, {"b", t.b}, {"coef", t.coef}});
  doc["interactions"] = std::move(inter);
  if (!marginals.empty()) {
    nlohmann::json jm = nlohmann::json::object();
    for (const auto& [name, m] : marginals) {
      nlohmann::json one;
      if (!m.level_probs.empty()) one["level_probs"] = m.level_probs;
      one["yes_prob"] = m.yes_prob;
      if (!m.count_probs.empty()) one["count_probs"] = m.count_probs;
      jm[name] = std::move(one);
    }
    doc["marginals"] = std::move(jm);
  }
  return doc.dump(2) + "\n";
}

SynthResult synthesize(const SurveySchema& schema, const SynthConfig& config,
                       std::uint64_t seed) {
  schema.validate();
  if (config.rows == 0) throw ConfigError("synthesize: rows must be positive");
  if (config.noise_sigma < 0) throw ConfigError("synthesize: noise_sigma must be >= 0");
  if (config.neutral_band < 0 || config.neutral_band > 0.9) {
    throw ConfigError("synthesize: neutral_band must lie in [0, 0.9]");
  }
  if (config.invalid_rate < 0 || config.invalid_rate >= 1.0) {
    throw ConfigError("synthesize: invalid_rate must lie in [0, 1)");
  }
  for (const auto& p : config.planted_pairs) {
    if (p.r < -1.0 || p.r > 1.0) {
      throw ConfigError("synthesize: planted pair target r outside [-1, 1]: " + p.a + "/" + p.b);
    }
    if (!schema.index_of(p.a) || !schema.index_of(p.b)) {
      throw ConfigError("synthesize: planted pair names unknown column: " + p.a + "/" + p.b);
    }
    if (p.a == p.b) throw ConfigError("synthesize: planted pair must use two columns: " + p.a);
  }
  for (const auto& [name, coef] : config.main_effects) {
    (void)coef;
    if (!schema.index_of(name)) throw ConfigError("synthesize: main effect names unknown column: " + name);
  }
  for (const auto& t : config.interactions) {
    if (!schema.index_of(t.a) || !schema.index_of(t.b)) {
      throw ConfigError("synthesize: interaction names unknown column: " + t.a + "/" + t.b);
    }
  }
  {
    std::set<std::string> planted_b;
    for (const auto& p : config.planted_pairs) {
      if (!planted_b.insert(p.b).second) {
        throw ConfigError("synthesize: column planted twice as a dependent pair member: " + p.b);
      }
    }
    for (const auto& p : config.planted_pairs) {
      if (planted_b.count(p.a)) {
        throw ConfigError("synthesize: planted pairs may not chain through column " + p.a);
      }
    }
  }

  const std::size_t n_cols = schema.columns.size();
  const std::size_t response = schema.response_index();
  const std::size_t M = config.rows;

  // Independent latent normals per column, seeded by column name so the
  // generated stream never depends on schema traversal order.
  std::vector<std::vector<double>> latents(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c == response) continue;
    Rng rng(derive_seed(seed, "column:" + schema.columns[c].name));
    latents[c].resize(M);
    for (std::size_t i = 0; i < M; ++i) latents[c][i] = rng.normal();
  }

  auto marginal_for = [&](const Column& col) {
    const auto it = config.marginals.find(col.name);
    return it != config.marginals.end() ? it->second : default_marginal(col);
  };

  // Which columns are the dependent member of a planted pair?
  std::vector<const PlantedPair*> planted_for(n_cols, nullptr);
  for (const auto& p : config.planted_pairs) {
    planted_for[*schema.index_of(p.b)] = &p;
  }

  std::vector<GeneratedColumn> columns(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c == response || planted_for[c]) continue;
    columns[c] = realize_column(schema.columns[c], marginal_for(schema.columns[c]), latents[c]);
  }

  // Dependent pair members: either the structural "driving years" mechanism
  // (count driven by a numeric-coded partner, capped so screening rule R1
  // never fires) or a Gaussian-copula coupling through the quantile map. Both
  // calibrate one scalar by bisection against the empirical correlation of
  // the values actually emitted.
  for (std::size_t c = 0; c < n_cols; ++c) {
    const PlantedPair* pair = planted_for[c];
    if (!pair) continue;
    const auto a_idx = *schema.index_of(pair->a);
    if (planted_for[a_idx]) {
      throw ConfigError("synthesize: planted pairs may not chain through column " + pair->a);
    }
    const auto& a_vals = columns[a_idx].values;
    const auto& col = schema.columns[c];
    const auto& eps = latents[c];

    const bool structural = col.kind == ColumnKind::count &&
                            schema.columns[a_idx].kind == ColumnKind::category;
    if (structural) {
      const double slope = 0.6;
      auto make_years = [&](double sigma) {
        std::vector<double> y(M);
        for (std::size_t i = 0; i < M; ++i) {
          const double cap = std::max(0.0, a_vals[i] - kLicensingAge);
          double v = std::round(slope * (a_vals[i] - kLicensingAge) + sigma * eps[i]);
          y[i] = std::clamp(v, 0.0, cap);
        }
        return y;
      };
      double lo = 0.0, hi = 1.0;
      double target = pair->r;
      if (target <= 0.0) {
        throw ConfigError("synthesize: planted pair " + pair->a + "/" + pair->b +
                          " requires a positive target r for a count column");
      }
      if (M >= 30 && safe_pearson(a_vals, make_years(0.0)) > target) {
        while (hi < 1e4 && safe_pearson(a_vals, make_years(hi)) > target) hi *= 2.0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (safe_pearson(a_vals, make_years(mid)) > target) lo = mid;
          else hi = mid;
        }
        columns[c].values = make_years(0.5 * (lo + hi));
      } else {
        columns[c].values = make_years(4.0);  // too few rows to calibrate
      }
      columns[c].cells.resize(M);
      for (std::size_t i = 0; i < M; ++i) {
        columns[c].cells[i] = std::to_string(static_cast<long long>(columns[c].values[i]));
      }
    } else {
      const auto& a_lat = latents[a_idx];
      const Marginal m = marginal_for(col);
      auto make_vals = [&](double rho) {
        std::vector<double> zb(M);
        const double mix = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        for (std::size_t i = 0; i < M; ++i) zb[i] = rho * a_lat[i] + mix * eps[i];
        return realize_column(col, m, zb);
      };
      if (M >= 30) {
        double lo = -1.0, hi = 1.0;
        for (int it = 0; it < 50; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (safe_pearson(a_vals, make_vals(mid).values) < pair->r) lo = mid;
          else hi = mid;
        }
        const double rho = 0.5 * (lo + hi);
        columns[c] = make_vals(rho);
        const double achieved = safe_pearson(a_vals, columns[c].values);
        if (std::abs(achieved - pair->r) > 0.05 && M >= 1000) {
          throw ConfigError("synthesize: planted pair " + pair->a + "/" + pair->b +
                            " target r unreachable under these marginals");
        }
      } else {
        columns[c] = make_vals(pair->r);
      }
    }
  }

  // Ground-truth logit over empirically standardized feature values.
  std::vector<double> mean(n_cols, 0.0), sd(n_cols, 1.0);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c == response) continue;
    const auto& v = columns[c].values;
    double mu = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(M);
    double var = 0.0;
    for (double x : v) var += (x - mu) * (x - mu);
    var /= static_cast<double>(M);
    mean[c] = mu;
    sd[c] = var > 0 ? std::sqrt(var) : 1.0;
  }
  auto standardized = [&](std::size_t c, std::size_t i) {
    return (columns[c].values[i] - mean[c]) / sd[c];
  };

  std::vector<double> logit(M, config.intercept);
  for (const auto& [name, coef] : config.main_effects) {
    const auto c = *schema.index_of(name);
    for (std::size_t i = 0; i < M; ++i) logit[i] += coef * standardized(c, i);
  }
  for (const auto& t : config.interactions) {
    const auto a = *schema.index_of(t.a);
    const auto b = *schema.index_of(t.b);
    for (std::size_t i = 0; i < M; ++i) {
      logit[i] += t.coef * standardized(a, i) * standardized(b, i);
    }
  }

  Rng label_rng(derive_seed(seed, "label-noise"));
  std::vector<double> latent(M);
  columns[response].values.resize(M);
  columns[response].cells.resize(M);
  for (std::size_t i = 0; i < M; ++i) {
    latent[i] = logit[i] + config.noise_sigma * label_rng.normal();
    const int level = trust_level(latent[i], config.neutral_band);
    columns[response].values[i] = level;
    columns[response].cells[i] = std::to_string(level);
  }

  // Completion times: comfortably above the screening minimum for clean rows.
  std::vector<std::string> completion(M);
  if (config.emit_completion_seconds) {
    Rng rng(derive_seed(seed, "completion"));
    for (std::size_t i = 0; i < M; ++i) {
      const double seconds = std::exp(5.4 + 0.35 * rng.normal());
      completion[i] = std::to_string(static_cast<long long>(std::round(seconds)));
    }
  }

  // Deliberate screening violations, cycling through the rule kinds.
  if (config.invalid_rate > 0.0) {
    const std::size_t k =
        std::min(M, static_cast<std::size_t>(std::llround(config.invalid_rate * static_cast<double>(M))));
    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "invalid"));
    rng.shuffle(order);
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<long>(k));
    std::sort(chosen.begin(), chosen.end());
    const auto likert_cols = schema.columns_of_kind(ColumnKind::likert7);
    const int kinds = config.emit_completion_seconds ? 4 : 3;
    const auto age_idx = schema.index_of("Age");
    const auto years_idx = schema.index_of("YearsDriving");
    int kind = 0;
    for (std::size_t i : chosen) {
      switch (kind) {
        case 0:  // implausible driving experience
          if (age_idx && years_idx) {
            columns[*age_idx].values[i] = 21;
            columns[*age_idx].cells[i] = "18-24";
            columns[*years_idx].values[i] = 30;
            columns[*years_idx].cells[i] = "30";
            break;
          }
          [[fallthrough]];
        case 1:  // letters where a number belongs
          if (years_idx) {
            columns[*years_idx].cells[i] = "abc";
          } else {
            columns[likert_cols.front()].cells[i] = "abc";
          }
          break;
        case 2:  // straight-lining
          for (std::size_t c : likert_cols) {
            columns[c].values[i] = 4;
            columns[c].cells[i] = "4";
          }
          break;
        default:  // finished suspiciously fast
          completion[i] = "20";
          break;
      }
      kind = (kind + 1) % kinds;
    }
  }

  SynthResult result;
  result.dataset.schema = schema;
  result.dataset.records.reserve(M);
  for (std::size_t i = 0; i < M; ++i) {
    SurveyRecord rec;
    rec.source_row = i;
    rec.cells.reserve(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) rec.cells.push_back(columns[c].cells[i]);
    if (config.emit_completion_seconds) {
      rec.completion_text = completion[i];
      double v = 0;
      try {
        v = std::stod(completion[i]);
        rec.completion_seconds = v;
      } catch (...) {
      }
    }
    result.dataset.records.push_back(std::move(rec));
  }
  result.logit = std::move(logit);
  result.latent = std::move(latent);
  return result;
}

SynthResult synthesize(const SynthConfig& config, std::uint64_t seed) {
  return synthesize(SurveySchema::av_survey(), config, seed);
}

}  // namespace boostlens

#include "boostlens/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "boostlens/csv.hpp"
#include "json.hpp"

namespace boostlens {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.empty()) return std::nullopt;
  double v = 0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_integer(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.empty()) return std::nullopt;
  int v = 0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return v;
}

/// Validates and decodes a cell for a numeric-kind column. Returns nullopt on
/// unparseable or out-of-range values; category cells are not numeric and are
/// handled separately.
std::optional<double> decode_numeric(const Column& col, const std::string& raw) {
  switch (col.kind) {
    case ColumnKind::likert7: {
      const auto v = parse_integer(raw);
      if (!v || *v < 1 || *v > 7) return std::nullopt;
      return static_cast<double>(*v);
    }
    case ColumnKind::yes_no: {
      const std::string t = lower(trim(raw));
      if (t == "yes" || t == "1") return 1.0;
      if (t == "no" || t == "0") return 0.0;
      return std::nullopt;
    }
    case ColumnKind::count: {
      const auto v = parse_number(raw);
      if (!v || *v < 0) return std::nullopt;
      return *v;
    }
    case ColumnKind::category:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::likert7: return "likert7";
    case ColumnKind::yes_no: return "yes_no";
    case ColumnKind::count: return "count";
    case ColumnKind::category: return "category";
  }
  return "unknown";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "likert7") return ColumnKind::likert7;
  if (s == "yes_no") return ColumnKind::yes_no;
  if (s == "count") return ColumnKind::count;
  if (s == "category") return ColumnKind::category;
  throw DataError("unknown column kind: " + s);
}

std::optional<int> Column::code_for(const std::string& level) const {
  const std::string t = trim(level);
  for (const auto& [name, code] : codes) {
    if (name == t) return code;
  }
  return std::nullopt;
}

void SurveySchema::validate() const {
  if (columns.empty()) throw DataError("schema: no columns");
  std::set<std::string> seen;
  std::size_t responses = 0;
  for (const auto& col : columns) {
    if (col.name.empty()) throw DataError("schema: empty column name");
    if (!seen.insert(col.name).second) throw DataError("schema: duplicate column name: " + col.name);
    if (col.response) ++responses;
    if (col.kind == ColumnKind::category && col.codes.empty()) {
      throw DataError("schema: category column without code table: " + col.name);
    }
    if (col.response && col.kind != ColumnKind::likert7) {
      throw DataError("schema: response column must be a 7-point scale: " + col.name);
    }
  }
  if (responses != 1) {
    throw DataError("schema: exactly one response column required, found " +
                    std::to_string(responses));
  }
}

std::size_t SurveySchema::response_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].response) return i;
  }
  throw DataError("schema: no response column");
}

std::optional<std::size_t> SurveySchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> SurveySchema::feature_names() const {
  std::vector<std::string> out;
  out.reserve(columns.size() - 1);
  for (const auto& col : columns) {
    if (!col.response) out.push_back(col.name);
  }
  return out;
}

std::vector<std::size_t> SurveySchema::columns_of_kind(ColumnKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].kind == kind) out.push_back(i);
  }
  return out;
}

SurveySchema SurveySchema::av_survey() {
  using K = ColumnKind;
  SurveySchema s;
  auto add = [&s](std::string name, K kind) {
    s.columns.push_back(Column{std::move(name), kind, false, {}});
  };
  // Age answers are buckets; codes are the bucket midpoints so screening and
  // synthesis can treat the column numerically.
  s.columns.push_back(Column{
      "Gender", K::category, false, {{"Female", 0}, {"Male", 1}, {"Other", 2}}});
  s.columns.push_back(Column{"Age",
                             K::category,
                             false,
                             {{"<18", 16},
                              {"18-24", 21},
                              {"25-34", 30},
                              {"35-44", 40},
                              {"45-54", 50},
                              {"55-64", 60},
                              {">=65", 70}}});
  s.columns.push_back(Column{"EducationLevel",
                             K::category,
                             false,
                             {{"High school degree or less", 0},
                              {"Associate degree", 1},
                              {"Some college", 2},
                              {"Bachelor's degree", 3},
                              {"Master's degree", 4},
                              {"Doctoral degree", 5},
                              {"Professional degree", 6}}});
  add("DrivingLicense", K::yes_no);
  add("YearsDriving", K::count);
  add("DrivingDaysPerWeek", K::count);
  add("EagertoAdopt", K::likert7);
  add("KnowledgeinAVs", K::likert7);
  add("AVAccident", K::yes_no);
  add("AssistTechExperience", K::likert7);
  add("BeeninAV", K::yes_no);
  add("Risk", K::likert7);
  add("Benefit", K::likert7);
  add("Assess5inAV", K::yes_no);
  add("Assess6to12inAV", K::yes_no);
  add("Assess13to17inAV", K::yes_no);
  add("Assess18inAV", K::yes_no);
  add("Control", K::likert7);
  add("Excitement", K::likert7);
  add("Enjoyment", K::likert7);
  add("Stress", K::likert7);
  add("Fear", K::likert7);
  add("Nervousness", K::likert7);
  s.columns.push_back(Column{"Trust", K::likert7, true, {}});
  s.validate();
  return s;
}

SurveySchema SurveySchema::from_json_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema: invalid JSON: ") + e.what());
  }
  SurveySchema s;
  if (!doc.contains("columns") || !doc["columns"].is_array()) {
    throw DataError("schema: missing \"columns\" array");
  }
  for (const auto& jc : doc["columns"]) {
    Column col;
    col.name = jc.at("name").get<std::string>();
    col.kind = column_kind_from_string(jc.at("kind").get<std::string>());
    col.response = jc.value("response", false);
    if (jc.contains("codes")) {
      for (const auto& pair : jc["codes"]) {
        col.codes.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<int>());
      }
    }
    s.columns.push_back(std::move(col));
  }
  s.validate();
  return s;
}

SurveySchema SurveySchema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("schema: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

std::string SurveySchema::to_json_string() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : columns) {
    nlohmann::json jc;
    jc["name"] = col.name;
    jc["kind"] = to_string(col.kind);
    if (col.response) jc["response"] = true;
    if (!col.codes.empty()) {
      nlohmann::json codes = nlohmann::json::array();
      for (const auto& [level, code] : col.codes) {
        codes.push_back(nlohmann::json::array({level, code}));
      }
      jc["codes"] = codes;
    }
    cols.push_back(std::move(jc));
  }
  nlohmann::json doc;
  doc["columns"] = std::move(cols);
  return doc.dump(2) + "\n";
}

std::string rule_code(ScreenRule rule) {
  switch (rule) {
    case ScreenRule::malformed_row: return "P1";
    case ScreenRule::implausible_experience: return "R1";
    case ScreenRule::invalid_numeric: return "R2";
    case ScreenRule::straight_lining: return "R3";
    case ScreenRule::too_fast: return "R4";
  }
  return "??";
}

SurveyDataset load_csv(const std::string& path, const SurveySchema& schema) {
  schema.validate();
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw DataError("load_csv: empty file: " + path);

  const auto& header = rows.front();
  const std::size_t n_cols = schema.columns.size();
  bool has_completion = false;
  if (header.size() == n_cols + 1 && trim(header.back()) == "completion_seconds") {
    has_completion = true;
  } else if (header.size() != n_cols) {
    throw DataError("load_csv: header has " + std::to_string(header.size()) +
                    " columns, schema expects " + std::to_string(n_cols) + ": " + path);
  }
  for (std::size_t i = 0; i < n_cols; ++i) {
    if (trim(header[i]) != schema.columns[i].name) {
      throw DataError("load_csv: header mismatch at column " + std::to_string(i + 1) +
                      ": expected \"" + schema.columns[i].name + "\", found \"" +
                      trim(header[i]) + "\"");
    }
  }

  SurveyDataset ds;
  ds.schema = schema;
  const std::size_t expected = n_cols + (has_completion ? 1 : 0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const std::size_t source_row = r - 1;
    if (cells.size() == 1 && cells[0].empty()) continue;  // blank line
    if (cells.size() != expected) {
      ds.rejection_log.push_back(
          {source_row, ScreenRule::malformed_row,
           "expected " + std::to_string(expected) + " fields, found " +
               std::to_string(cells.size())});
      continue;
    }
    SurveyRecord rec;
    rec.source_row = source_row;
    rec.cells.assign(cells.begin(), cells.begin() + static_cast<long>(n_cols));
    if (has_completion) {
      const std::string raw = trim(cells.back());
      if (!raw.empty()) {
        rec.completion_text = raw;
        const auto v = parse_number(raw);
        if (v && *v >= 0) rec.completion_seconds = *v;
      }
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

namespace {

/// Rules that fire on one record, in rule order. Shared by screen_invalid and
/// the idempotence guarantee: a record that passes once passes again.
std::vector<std::pair<ScreenRule, std::string>> rules_fired(const SurveySchema& schema,
                                                            const SurveyRecord& rec,
                                                            const ScreenConfig& cfg) {
  std::vector<std::pair<ScreenRule, std::string>> fired;

  // R1: driving experience implausible for the age bucket.
  const auto age_idx = schema.index_of(cfg.age_column);
  const auto years_idx = schema.index_of(cfg.years_column);
  if (age_idx && years_idx) {
    const auto& age_col = schema.columns[*age_idx];
    std::optional<double> age_mid;
    if (age_col.kind == ColumnKind::category) {
      if (const auto code = age_col.code_for(rec.cells[*age_idx])) age_mid = *code;
    } else {
      age_mid = decode_numeric(age_col, rec.cells[*age_idx]);
    }
    const auto years = decode_numeric(schema.columns[*years_idx], rec.cells[*years_idx]);
    if (age_mid && years && *years > *age_mid - cfg.min_driving_age) {
      std::ostringstream msg;
      msg << cfg.years_column << "=" << *years << " exceeds " << cfg.age_column
          << " midpoint " << *age_mid << " - " << cfg.min_driving_age;
      fired.emplace_back(ScreenRule::implausible_experience, msg.str());
    }
  }

  // R2: unparseable or out-of-range numeric cells (including completion time).
  {
    std::string bad;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const auto& col = schema.columns[c];
      if (col.kind == ColumnKind::category) continue;
      if (!decode_numeric(col, rec.cells[c])) {
        if (!bad.empty()) bad += ", ";
        bad += col.name + "=\"" + trim(rec.cells[c]) + "\"";
      }
    }
    if (rec.completion_text && !rec.completion_seconds) {
      if (!bad.empty()) bad += ", ";
      bad += "completion_seconds=\"" + *rec.completion_text + "\"";
    }
    if (!bad.empty()) fired.emplace_back(ScreenRule::invalid_numeric, "invalid value: " + bad);
  }

  // R3: straight-lining across every 7-point scale question.
  {
    const auto likert = schema.columns_of_kind(ColumnKind::likert7);
    if (likert.size() >= 2) {
      bool all_parse = true;
      bool all_equal = true;
      std::optional<double> first;
      for (std::size_t c : likert) {
        const auto v = decode_numeric(schema.columns[c], rec.cells[c]);
        if (!v) {
          all_parse = false;
          break;
        }
        if (!first) first = *v;
        else if (*v != *first) all_equal = false;
      }
      if (all_parse && all_equal && first) {
        fired.emplace_back(ScreenRule::straight_lining,
                           "all scale answers equal " + std::to_string(static_cast<int>(*first)));
      }
    }
  }

  // R4: completed implausibly fast.
  if (rec.completion_seconds && *rec.completion_seconds < cfg.min_completion_seconds) {
    std::ostringstream msg;
    msg << "completed in " << *rec.completion_seconds << "s, minimum is "
        << cfg.min_completion_seconds << "s";
    fired.emplace_back(ScreenRule::too_fast, msg.str());
  }

  return fired;
}

}  // namespace

SurveyDataset screen_invalid(const SurveyDataset& dataset, const ScreenConfig& rules) {
  SurveyDataset out;
  out.schema = dataset.schema;
  out.rejection_log = dataset.rejection_log;
  for (const auto& rec : dataset.records) {
    auto fired = rules_fired(dataset.schema, rec, rules);
    if (fired.empty()) {
      out.records.push_back(rec);
    } else {
      for (auto& [rule, detail] : fired) {
        out.rejection_log.push_back({rec.source_row, rule, std::move(detail)});
      }
    }
  }
  std::stable_sort(out.rejection_log.begin(), out.rejection_log.end(),
                   [](const Rejection& a, const Rejection& b) {
                     if (a.source_row != b.source_row) return a.source_row < b.source_row;
                     return rule_code(a.rule) < rule_code(b.rule);
                   });
  return out;
}

void write_csv(const SurveyDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_csv: cannot open for writing: " + path);
  bool has_completion = false;
  for (const auto& rec : dataset.records) {
    if (rec.completion_text) {
      has_completion = true;
      break;
    }
  }
  std::vector<std::string> header;
  for (const auto& col : dataset.schema.columns) header.push_back(col.name);
  if (has_completion) header.push_back("completion_seconds");
  csv::write_row(out, header);
  for (const auto& rec : dataset.records) {
    std::vector<std::string> row = rec.cells;
    if (has_completion) row.push_back(rec.completion_text.value_or(""));
    csv::write_row(out, row);
  }
}

void write_rejection_report(const SurveyDataset& dataset, const std::string& path) {
  nlohmann::json rejected = nlohmann::json::array();
  std::map<std::string, std::size_t> counts;
  std::set<std::size_t> rows;
  for (const auto& rej : dataset.rejection_log) {
    rejected.push_back({{"row", rej.source_row},
                        {"rule", rule_code(rej.rule)},
                        {"detail", rej.detail}});
    ++counts[rule_code(rej.rule)];
    rows.insert(rej.source_row);
  }
  nlohmann::json doc;
  doc["rejected"] = std::move(rejected);
  doc["rule_counts"] = counts;
  doc["rejected_rows"] = rows.size();
  doc["retained_rows"] = dataset.records.size();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_rejection_report: cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("pearson_correlation: length mismatch: " + std::to_string(x.size()) +
                    " vs " + std::to_string(y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) throw DataError("pearson_correlation: need at least 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DataError("pearson_correlation: undefined for constant series");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(row_count);
  for (std::size_t r = 0; r < row_count; ++r) out[r] = at(r, c);
  return out;
}

std::optional<std::size_t> FeatureMatrix::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

std::pair<FeatureMatrix, std::vector<DroppedColumn>> prune_correlated(
    const FeatureMatrix& matrix, double threshold) {
  if (!(threshold > 0.0) || threshold > 1.0) {
    throw ConfigError("prune_correlated: threshold must lie in (0, 1]");
  }
  if (matrix.row_count < 2) throw DataError("prune_correlated: need at least 2 rows");

  const std::size_t n = matrix.col_count();
  std::vector<DroppedColumn> dropped;
  std::vector<bool> active(n, true);

  // Constant columns have undefined correlations; drop them up front.
  std::vector<std::vector<double>> cols(n);
  for (std::size_t c = 0; c < n; ++c) {
    cols[c] = matrix.column(c);
    const double first = cols[c].empty() ? 0.0 : cols[c][0];
    bool constant = true;
    for (double v : cols[c]) {
      if (v != first) {
        constant = false;
        break;
      }
    }
    if (constant) {
      dropped.push_back({matrix.names[c], "", 0.0, DropReason::constant});
      active[c] = false;
    }
  }

  // Correlations never change as columns drop, only the active set does.
  std::vector<double> corr(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!active[j]) continue;
      const double r = pearson_correlation(cols[i], cols[j]);
      corr[i * n + j] = r;
      corr[j * n + i] = r;
    }
  }

  while (true) {
    double best = threshold;
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (std::abs(corr[i * n + j]) > best) {
          best = std::abs(corr[i * n + j]);
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n) break;

    // Drop the member that is more correlated with everything else; on a tie
    // the later column goes, so the outcome never depends on float noise in
    // two ways at once.
    auto mean_abs_corr = [&](std::size_t c) {
      double total = 0;
      std::size_t count = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (!active[k] || k == c) continue;
        total += std::abs(corr[c * n + k]);
        ++count;
      }
      return count == 0 ? 0.0 : total / static_cast<double>(count);
    };
    const double mi = mean_abs_corr(bi);
    const double mj = mean_abs_corr(bj);
    std::size_t drop = bj;
    if (mi > mj) drop = bi;
    const std::size_t keep = (drop == bi) ? bj : bi;
    dropped.push_back({matrix.names[drop], matrix.names[keep], corr[bi * n + bj],
                       DropReason::correlated});
    active[drop] = false;
  }

  FeatureMatrix out;
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < n; ++c) {
    if (active[c]) {
      kept.push_back(c);
      out.names.push_back(matrix.names[c]);
    }
  }
  out.row_count = matrix.row_count;
  out.values.reserve(out.row_count * kept.size());
  for (std::size_t r = 0; r < matrix.row_count; ++r) {
    for (std::size_t c : kept) out.values.push_back(matrix.at(r, c));
  }
  return {std::move(out), std::move(dropped)};
}

TrustLabel binarize_trust(int likert) {
  if (likert < 1 || likert > 7) {
    throw DataError("binarize_trust: value out of range: " + std::to_string(likert));
  }
  if (likert >= 5) return TrustLabel::trust;
  if (likert <= 3) return TrustLabel::distrust;
  return TrustLabel::excluded;
}

std::pair<FeatureMatrix, LabelVector> encode_features(const SurveyDataset& dataset) {
  const auto& schema = dataset.schema;
  schema.validate();
  const std::size_t response = schema.response_index();

  FeatureMatrix matrix;
  matrix.names = schema.feature_names();
  LabelVector labels;

  for (const auto& rec : dataset.records) {
    if (rec.cells.size() != schema.columns.size()) {
      throw DataError("encode_features: record " + std::to_string(rec.source_row) +
                      " has wrong cell count");
    }
    const auto trust_raw = decode_numeric(schema.columns[response], rec.cells[response]);
    if (!trust_raw) {
      throw DataError("encode_features: record " + std::to_string(rec.source_row) +
                      ": invalid response value \"" + trim(rec.cells[response]) + "\"");
    }
    const TrustLabel label = binarize_trust(static_cast<int>(*trust_raw));
    if (label == TrustLabel::excluded) continue;  // neutral answers carry no class

    std::vector<double> row;
    row.reserve(matrix.names.size());
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      if (c == response) continue;
      const auto& col = schema.columns[c];
      if (col.kind == ColumnKind::category) {
        const auto code = col.code_for(rec.cells[c]);
        if (!code) {
          throw DataError("encode_features: record " + std::to_string(rec.source_row) +
                          ": unknown category level \"" + trim(rec.cells[c]) +
                          "\" in column " + col.name);
        }
        row.push_back(static_cast<double>(*code));
      } else {
        const auto v = decode_numeric(col, rec.cells[c]);
        if (!v) {
          throw DataError("encode_features: record " + std::to_string(rec.source_row) +
                          ": invalid value \"" + trim(rec.cells[c]) + "\" in column " +
                          col.name);
        }
        row.push_back(*v);
      }
    }
    matrix.values.insert(matrix.values.end(), row.begin(), row.end());
    ++matrix.row_count;
    labels.values.push_back(label == TrustLabel::trust ? 1 : 0);
  }
  return {std::move(matrix), std::move(labels)};
}

}  // namespace boostlens

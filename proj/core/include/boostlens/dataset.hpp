#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "boostlens/errors.hpp"

namespace boostlens {

enum class ColumnKind { likert7, yes_no, count, category };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

/// One survey column. `name` is the short header name used in CSV files.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::likert7;
  bool response = false;
  /// Fixed level -> code table for category columns. Codes live in the schema
  /// so encodings never depend on the order levels appear in a file.
  std::vector<std::pair<std::string, int>> codes;

  std::optional<int> code_for(const std::string& level) const;
};

struct SurveySchema {
  std::vector<Column> columns;

  /// Throws DataError on duplicate names, missing/multiple response columns,
  /// or category columns without a code table.
  void validate() const;
  std::size_t response_index() const;
  std::optional<std::size_t> index_of(const std::string& name) const;
  std::vector<std::string> feature_names() const;
  std::vector<std::size_t> columns_of_kind(ColumnKind kind) const;

  /// The 24-column AV trust survey: 23 predictors plus the "Trust" response.
  static SurveySchema av_survey();
  static SurveySchema from_json_string(const std::string& text);
  static SurveySchema from_json_file(const std::string& path);
  std::string to_json_string() const;
};

struct SurveyRecord {
  std::vector<std::string> cells;  // raw text, one per schema column
  std::optional<std::string> completion_text;  // raw cell, kept for screening
  std::optional<double> completion_seconds;    // parsed when valid
  std::size_t source_row = 0;  // record index in the originally loaded file
};

enum class ScreenRule {
  malformed_row,           // P1: wrong field count in the source file
  implausible_experience,  // R1: driving years exceed age minus licensing age
  invalid_numeric,         // R2: numeric cell unparseable or out of range
  straight_lining,         // R3: identical answer to every scale question
  too_fast,                // R4: completion time under the minimum
};

std::string rule_code(ScreenRule rule);  // "P1", "R1", ..., "R4"

struct Rejection {
  std::size_t source_row = 0;
  ScreenRule rule = ScreenRule::malformed_row;
  std::string detail;
};

struct SurveyDataset {
  SurveySchema schema;
  std::vector<SurveyRecord> records;     // retained records, original order
  std::vector<Rejection> rejection_log;  // ordered by source_row, then rule
};

struct ScreenConfig {
  double min_completion_seconds = 60.0;
  /// R1 flags records whose driving years exceed age midpoint - this value.
  int min_driving_age = 14;
  std::string age_column = "Age";
  std::string years_column = "YearsDriving";
};

/// Loads a CSV whose header must match the schema column names in order. An
/// optional trailing "completion_seconds" column is accepted. Structurally
/// broken rows are logged under rule P1, never silently dropped.
SurveyDataset load_csv(const std::string& path, const SurveySchema& schema);

/// Applies rules R1-R4. Never fails: offending records move to the rejection
/// log (one entry per rule that fires) and survivors keep their order.
/// Idempotent: screening a screened dataset changes nothing.
SurveyDataset screen_invalid(const SurveyDataset& dataset, const ScreenConfig& rules = {});

void write_csv(const SurveyDataset& dataset, const std::string& path);
void write_rejection_report(const SurveyDataset& dataset, const std::string& path);

/// Product-moment correlation. Throws DataError on length mismatch, length
/// < 2, or when either series is constant (undefined correlation).
double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct FeatureMatrix {
  std::vector<std::string> names;
  std::size_t row_count = 0;
  std::vector<double> values;  // row-major, row_count x names.size()

  std::size_t col_count() const { return names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * names.size() + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * names.size() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * names.size(), names.size()};
  }
  std::vector<double> column(std::size_t c) const;
  std::optional<std::size_t> index_of(const std::string& name) const;
};

struct LabelVector {
  std::vector<int> values;  // 0 = distrust, 1 = trust
  std::size_t size() const { return values.size(); }
};

enum class DropReason { correlated, constant };

struct DroppedColumn {
  std::string dropped;
  std::string kept;  // retained partner; empty for constant columns
  double r = 0.0;    // correlation with the partner at drop time
  DropReason reason = DropReason::correlated;
};

/// Drops constant columns first, then repeatedly takes the most correlated
/// remaining pair above `threshold` and drops the member whose mean |r|
/// against all other columns is higher (ties: the later column). The result
/// contains no pair with |r| > threshold.
std::pair<FeatureMatrix, std::vector<DroppedColumn>> prune_correlated(
    const FeatureMatrix& matrix, double threshold);

enum class TrustLabel { distrust = 0, trust = 1, excluded };

/// 5..7 -> trust, 1..3 -> distrust, 4 -> excluded. Throws on other values.
TrustLabel binarize_trust(int likert);

/// Numeric design matrix + binary labels from a screened dataset. Rows whose
/// response is neutral (4) are removed. Throws DataError on unknown category
/// levels or unparseable cells (screened data should contain neither).
std::pair<FeatureMatrix, LabelVector> encode_features(const SurveyDataset& dataset);

}  // namespace boostlens

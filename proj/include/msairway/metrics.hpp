#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "msairway/grid.hpp"

namespace msairway {

class UndefinedMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// All scores are percentages in [0, 100].

/// 100 * 2|P and G| / (|P| + |G|); 100 when both masks are empty.
double dsc(const Mask3D& pred, const Mask3D& gt);
/// 100 * |P and G| / |G|; throws UndefinedMetricError when G is empty.
double tpr(const Mask3D& pred, const Mask3D& gt);
/// 100 * |P \ G| / |not G|; 0 when G covers the whole grid.
double fpr(const Mask3D& pred, const Mask3D& gt);

/// Mean of per-slice DSC over slices where either mask is non-empty.
double dsc_per_slice(const Mask3D& pred, const Mask3D& gt);

struct OverlapScores {
  double dsc = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

OverlapScores score(const Mask3D& pred, const Mask3D& gt);

/// One table row: a strategy's score for each case, in case order.
struct StrategyRow {
  std::string strategy;
  std::vector<std::string> cases;
  std::vector<double> values;
};

struct RowSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1); 0 for fewer than two cases
};

RowSummary summarize(std::span<const double> values);

/// Rows of per-case gains in percentage points against the baseline row.
struct GainTable {
  std::string baseline;
  std::vector<std::string> cases;
  std::vector<StrategyRow> rows;
};

/// Builds gains against `baseline` for every other row. All rows must list
/// the same cases in the same order.
GainTable gain_table(std::span<const StrategyRow> rows, const std::string& baseline = "ir1");

/// CSV with a header "strategy,<cases...>,Average,SD" and one line per row,
/// 2-decimal fixed point. An empty case list yields the header only.
std::string table_csv(std::span<const StrategyRow> rows, std::span<const std::string> cases);

/// Aligned text table with an "Average ± SD" final column.
std::string table_text(const std::string& title, std::span<const StrategyRow> rows,
                       std::span<const std::string> cases);

/// Parses a CSV written by table_csv; Average and SD columns are ignored.
std::vector<StrategyRow> parse_table_csv(const std::string& text);

/// Writes <prefix>_scores.csv / .txt and, when gains has rows, <prefix>_gains.csv / .txt.
void emit_report(std::span<const StrategyRow> scores, const GainTable& gains,
                 const std::filesystem::path& prefix);

}  // namespace msairway

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minicex/metrics.hpp"
#include "minicex/psychometrics.hpp"

namespace minicex {

enum class TableFormat { kMarkdown, kCsv };
TableFormat parse_table_format(std::string_view s);  // "md" | "csv"
std::string_view extension(TableFormat f);

/// Judge agreement per item and per-model scores.
struct EvaluationReport {
  std::map<int, std::string> primary_names;
  std::vector<ItemMetrics> items;
  std::vector<ModelScore> scores;
  std::optional<std::int64_t> seed;

  bool empty() const { return items.empty() && scores.empty(); }
};

struct PrimaryReliability {
  std::string name;
  std::size_t item_count = 0;
  double alpha_before = 0;
  std::optional<double> alpha_after;  // whole scale without this primary
};

struct PsychometricReport {
  std::vector<PrimaryReliability> rows;
  std::size_t total_items = 0;
  double total_alpha = 0;
  KmoResult kmo;
  SphericityResult bartlett;
  std::size_t respondents = 0;
  std::optional<std::int64_t> seed;

  bool empty() const { return rows.empty() && total_items == 0; }
};

/// Builds the reliability/validity report. Each primary's "before" alpha is
/// over its own items, its "after" alpha over the remaining items.
PsychometricReport psychometric_report(const ResponseMatrix& responses, const RubricScale& scale);

/// Columns: Primary Item, Secondary Item, Accuracy, Precision, Recall, F1.
std::string render_item_metrics(const EvaluationReport& report, TableFormat format);
/// Columns: Model, one per primary, Average.
std::string render_scores(const EvaluationReport& report, TableFormat format);
/// Both tables, each under a heading (md) or separated by a blank line (csv).
/// Throws ValidationError on an empty report.
std::string render_tables(const EvaluationReport& report, TableFormat format);
std::string render_tables(const PsychometricReport& report, TableFormat format);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

}  // namespace minicex

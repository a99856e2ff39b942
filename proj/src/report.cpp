#include "minicex/report.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "minicex/error.hpp"

namespace minicex {

TableFormat parse_table_format(std::string_view s) {
  if (s == "md") return TableFormat::kMarkdown;
  if (s == "csv") return TableFormat::kCsv;
  throw ValidationError("unknown format '" + std::string(s) + "' (expected md or csv)");
}

std::string_view extension(TableFormat f) { return f == TableFormat::kMarkdown ? "md" : "csv"; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<bool> numeric;  // right-align in markdown
  std::vector<Row> rows;
};

std::string render(const Table& t, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::kCsv) {
    auto line = [&](const Row& r) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(r[i]);
      out << "\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out.str();
  }
  auto line = [&](const Row& r) {
    out << "|";
    for (const auto& c : r) out << " " << c << " |";
    out << "\n";
  };
  line(t.header);
  out << "|";
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (t.numeric[i] ? " ---: |" : " --- |");
  out << "\n";
  for (const auto& r : t.rows) line(r);
  return out.str();
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string percent_or_dash(const std::optional<double>& v) { return v ? format_percent(*v) : "-"; }

std::string seed_line(const std::optional<std::int64_t>& seed, TableFormat format) {
  if (!seed) return {};
  return format == TableFormat::kCsv ? "# seed: " + std::to_string(*seed) + "\n"
                                     : "Seed: " + std::to_string(*seed) + "\n\n";
}

std::string primary_name(const EvaluationReport& r, int id) {
  auto it = r.primary_names.find(id);
  return it != r.primary_names.end() ? it->second : std::to_string(id);
}

Table item_table(const EvaluationReport& r) {
  Table t{{"Primary Item", "Secondary Item", "Accuracy", "Precision", "Recall", "F1"},
          {false, false, true, true, true, true},
          {}};
  for (const auto& m : r.items) {
    t.rows.push_back({primary_name(r, m.primary_id), m.item_id, format_percent(m.rates.accuracy),
                      percent_or_dash(m.rates.precision), percent_or_dash(m.rates.recall),
                      percent_or_dash(m.rates.f1)});
  }
  return t;
}

Table score_table(const EvaluationReport& r) {
  std::set<int> primaries;
  for (const auto& s : r.scores) {
    for (const auto& [p, _] : s.percentages) primaries.insert(p);
  }
  Table t{{"Model"}, {false}, {}};
  for (int p : primaries) {
    t.header.push_back(primary_name(r, p));
    t.numeric.push_back(true);
  }
  t.header.push_back("Average");
  t.numeric.push_back(true);
  for (const auto& s : r.scores) {
    Row row{s.model_name};
    for (int p : primaries) {
      auto it = s.percentages.find(p);
      row.push_back(it != s.percentages.end() ? format_percent(it->second) : "-");
    }
    row.push_back(format_percent(s.average));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

std::string render_item_metrics(const EvaluationReport& report, TableFormat format) {
  if (report.items.empty()) throw ValidationError("no item metrics to render");
  return seed_line(report.seed, format) + render(item_table(report), format);
}

std::string render_scores(const EvaluationReport& report, TableFormat format) {
  if (report.scores.empty()) throw ValidationError("no model scores to render");
  return seed_line(report.seed, format) + render(score_table(report), format);
}

std::string render_tables(const EvaluationReport& report, TableFormat format) {
  if (report.empty()) throw ValidationError("empty report");
  std::string out = seed_line(report.seed, format);
  bool first = true;
  auto section = [&](const std::string& title, const Table& t) {
    if (!first) out += "\n";
    first = false;
    if (format == TableFormat::kMarkdown) out += "## " + title + "\n\n";
    out += render(t, format);
  };
  if (!report.items.empty()) section("Automatic evaluation on secondary items (%)", item_table(report));
  if (!report.scores.empty()) section("Model scores per primary item (%)", score_table(report));
  return out;
}

PsychometricReport psychometric_report(const ResponseMatrix& responses, const RubricScale& scale) {
  std::vector<std::string> all_ids;
  for (const auto& p : scale.primaries()) {
    for (const auto& item : p.items) all_ids.push_back(item.id);
  }
  const ResponseMatrix full = responses.select(all_ids);
  PsychometricReport r;
  r.respondents = full.respondents();
  r.total_items = all_ids.size();
  r.total_alpha = cronbach_alpha(full).alpha;
  for (const auto& p : scale.primaries()) {
    std::vector<std::string> own;
    std::vector<std::string> rest;
    for (const auto& other : scale.primaries()) {
      for (const auto& item : other.items) (other.id == p.id ? own : rest).push_back(item.id);
    }
    PrimaryReliability row;
    row.name = p.name;
    row.item_count = own.size();
    row.alpha_before = cronbach_alpha(full.select(own)).alpha;
    if (rest.size() >= 2) row.alpha_after = cronbach_alpha(full.select(rest)).alpha;
    r.rows.push_back(std::move(row));
  }
  const CorrelationMatrix corr = correlation_matrix(full);
  r.kmo = kmo(corr);
  r.bartlett = bartlett_sphericity(corr, full.respondents());
  return r;
}

std::string render_tables(const PsychometricReport& report, TableFormat format) {
  if (report.empty()) throw ValidationError("empty report");
  Table reliability{{"Item", "# of Item", "Before deletion", "After deletion"}, {false, true, true, true}, {}};
  for (const auto& row : report.rows) {
    reliability.rows.push_back({row.name, std::to_string(row.item_count), fixed(row.alpha_before, 3),
                                row.alpha_after ? fixed(*row.alpha_after, 3) : "-"});
  }
  reliability.rows.push_back({"Total", std::to_string(report.total_items), fixed(report.total_alpha, 3), "-"});

  Table validity{{"Test", "Statistic", "Value"}, {false, false, true}, {}};
  validity.rows.push_back({"KMO", "", report.kmo.statistic ? fixed(*report.kmo.statistic, 3) : "-"});
  validity.rows.push_back({"Bartlett's test for sphericity", "Approximate chi-square",
                           fixed(report.bartlett.chi_square, 3)});
  validity.rows.push_back({"Bartlett's test for sphericity", "Degrees of freedom",
                           std::to_string(report.bartlett.degrees_of_freedom)});
  validity.rows.push_back({"Bartlett's test for sphericity", "Significance", fixed(report.bartlett.p_value, 3)});

  std::string out = seed_line(report.seed, format);
  if (format == TableFormat::kMarkdown) out += "## Cronbach's alpha before and after deletion\n\n";
  out += render(reliability, format);
  out += "\n";
  if (format == TableFormat::kMarkdown) out += "## KMO and Bartlett's test for sphericity\n\n";
  out += render(validity, format);
  return out;
}

}  // namespace minicex

#include <doctest.h>

#include "minicex/error.hpp"
#include "minicex/report.hpp"

using namespace minicex;

namespace {

EvaluationReport gpt4_only() {
  EvaluationReport r;
  r.primary_names = {{1, "Medical interviewing skills"}, {2, "Humanistic care"}, {3, "Comprehensive diagnostic and treatment abilities"}};
  r.scores.push_back(score_from_points("GPT-4", {{1, 51}, {2, 138}, {3, 64}}, {{1, 144}, {2, 144}, {3, 126}}));
  return r;
}

}  // namespace

TEST_CASE("score table row") {
  const auto r = gpt4_only();
  CHECK(render_scores(r, TableFormat::kMarkdown) ==
        "| Model | Medical interviewing skills | Humanistic care | Comprehensive diagnostic and treatment abilities | "
        "Average |\n"
        "| --- | ---: | ---: | ---: | ---: |\n"
        "| GPT-4 | 35.42 | 95.83 | 50.79 | 61.11 |\n");
  CHECK(render_scores(r, TableFormat::kCsv) ==
        "Model,Medical interviewing skills,Humanistic care,Comprehensive diagnostic and treatment abilities,Average\n"
        "GPT-4,35.42,95.83,50.79,61.11\n");
}

TEST_CASE("single item table") {
  EvaluationReport r;
  r.primary_names = {{2, "Humanistic care"}};
  ItemMetrics m{"2.1", 2, {243, 2257, 0, 0}, classification_rates({243, 2257, 0, 0})};
  r.items.push_back(m);
  r.seed = 7;
  CHECK(render_item_metrics(r, TableFormat::kMarkdown) ==
        "Seed: 7\n\n"
        "| Primary Item | Secondary Item | Accuracy | Precision | Recall | F1 |\n"
        "| --- | --- | ---: | ---: | ---: | ---: |\n"
        "| Humanistic care | 2.1 | 9.72 | 9.72 | 100.00 | 17.72 |\n");
  CHECK(render_item_metrics(r, TableFormat::kCsv) ==
        "# seed: 7\n"
        "Primary Item,Secondary Item,Accuracy,Precision,Recall,F1\n"
        "Humanistic care,2.1,9.72,9.72,100.00,17.72\n");
  r.items[0].rates = classification_rates({0, 0, 0, 4});
  CHECK(render_item_metrics(r, TableFormat::kCsv).find("2.1,100.00,-,-,-\n") != std::string::npos);
}

TEST_CASE("render_tables sections") {
  auto r = gpt4_only();
  const auto md = render_tables(r, TableFormat::kMarkdown);
  CHECK(md.rfind("## Model scores per primary item (%)\n\n| Model |", 0) == 0);
  CHECK(md.find("Automatic evaluation") == std::string::npos);
  CHECK_THROWS_AS(render_tables(EvaluationReport{}, TableFormat::kMarkdown), ValidationError);
  CHECK_THROWS_AS(render_tables(PsychometricReport{}, TableFormat::kCsv), ValidationError);
  CHECK_THROWS_AS(render_scores(EvaluationReport{}, TableFormat::kCsv), ValidationError);
}

TEST_CASE("csv quoting round trip") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  // Minimal RFC 4180 reader as the inverse.
  auto unquote = [](const std::string& f) {
    if (f.empty() || f.front() != '"') return f;
    std::string out;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
      out += f[i];
      if (f[i] == '"') ++i;
    }
    return out;
  };
  for (std::string s : {"", "x", "a,b", "\"", "\"\"", "q\"q,\r\n", "日本,語"}) CHECK(unquote(csv_field(s)) == s);
  EvaluationReport r;
  r.scores.push_back(score_from_points("model, \"v2\"", {{1, 1}}, {{1, 2}}));
  CHECK(render_scores(r, TableFormat::kCsv) == "Model,1,Average\n\"model, \"\"v2\"\"\",50.00,50.00\n");
}

TEST_CASE("table format") {
  CHECK(parse_table_format("md") == TableFormat::kMarkdown);
  CHECK(parse_table_format("csv") == TableFormat::kCsv);
  CHECK(extension(TableFormat::kCsv) == "csv");
  CHECK_THROWS_AS(parse_table_format("html"), ValidationError);
}

TEST_CASE("psychometric report layout") {
  PsychometricReport r;
  r.rows.push_back({"A", 2, 0.8123, 0.5});
  r.rows.push_back({"B", 1, 0.0, std::nullopt});
  r.total_items = 3;
  r.total_alpha = 0.9;
  r.kmo.statistic = 0.8124;
  r.bartlett = {2343.197, 3, 1e-12};
  r.respondents = 10;
  CHECK(render_tables(r, TableFormat::kMarkdown) ==
        "## Cronbach's alpha before and after deletion\n\n"
        "| Item | # of Item | Before deletion | After deletion |\n"
        "| --- | ---: | ---: | ---: |\n"
        "| A | 2 | 0.812 | 0.500 |\n"
        "| B | 1 | 0.000 | - |\n"
        "| Total | 3 | 0.900 | - |\n"
        "\n"
        "## KMO and Bartlett's test for sphericity\n\n"
        "| Test | Statistic | Value |\n"
        "| --- | --- | ---: |\n"
        "| KMO |  | 0.812 |\n"
        "| Bartlett's test for sphericity | Approximate chi-square | 2343.197 |\n"
        "| Bartlett's test for sphericity | Degrees of freedom | 3 |\n"
        "| Bartlett's test for sphericity | Significance | 0.000 |\n");
  r.kmo.statistic.reset();
  CHECK(render_tables(r, TableFormat::kCsv).find("KMO,,-\n") != std::string::npos);
}

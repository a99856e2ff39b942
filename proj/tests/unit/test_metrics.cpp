#include <doctest.h>

#include <random>

#include "minicex/error.hpp"
#include "minicex/metrics.hpp"
#include "minicex/rubric.hpp"

using namespace minicex;

namespace {

const RubricScale& canonical() {
  static const RubricScale s = load_scale_file(MINICEX_SOURCE_DIR "/data/scale/llm_mini_cex.json");
  return s;
}

JudgmentVector vector_with(const std::string& id, int fill, const std::map<std::string, int>& overrides = {}) {
  JudgmentVector v;
  v.dialogue_id = id;
  for (const auto& item : canonical().scoreable_ids()) v.labels[item] = fill;
  for (const auto& [k, x] : overrides) v.labels[k] = x;
  return v;
}

AnnotationRecord annotation_of(const JudgmentVector& v) { return {v.dialogue_id, v.labels, std::nullopt}; }

}  // namespace

TEST_CASE("confusion_matrix") {
  const int p1[] = {1, 1, 0, 0}, l1[] = {1, 0, 0, 1};
  CHECK(confusion_matrix(p1, l1) == ConfusionMatrix{1, 1, 1, 1});
  const int p2[] = {1, 1, 1};
  CHECK(confusion_matrix(p2, p2) == ConfusionMatrix{3, 0, 0, 0});
  const int one[] = {1}, two[] = {1, 0};
  CHECK_THROWS_AS(confusion_matrix(one, two), ValidationError);
  CHECK_THROWS_AS(confusion_matrix(std::span<const int>{}, std::span<const int>{}), ValidationError);
  const int bad[] = {2};
  CHECK_THROWS_AS(confusion_matrix(bad, one), ValidationError);
}

TEST_CASE("classification_rates") {
  const auto r = classification_rates({0, 0, 0, 5});
  CHECK(r.accuracy == 1.0);
  CHECK_FALSE(r.precision);
  CHECK_FALSE(r.recall);
  CHECK_FALSE(r.f1);

  const auto q = classification_rates({0, 3, 2, 5});
  CHECK(*q.precision == 0.0);
  CHECK(*q.recall == 0.0);
  CHECK_FALSE(q.f1);

  CHECK_THROWS_AS(classification_rates({}), ValidationError);
  CHECK_THROWS_AS(classification_rates({-1, 0, 0, 2}), ValidationError);
}

TEST_CASE("f1 lies between precision and recall") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> count(0, 50);
  for (int i = 0; i < 500; ++i) {
    const ConfusionMatrix m{count(rng), count(rng), count(rng), count(rng)};
    if (m.total() == 0) continue;
    const auto r = classification_rates(m);
    if (!r.f1) continue;
    CHECK(*r.f1 >= std::min(*r.precision, *r.recall) - 1e-15);
    CHECK(*r.f1 <= std::max(*r.precision, *r.recall) + 1e-15);
  }
}

TEST_CASE("per_item_metrics") {
  SUBCASE("perfect judge") {
    std::vector<JudgmentVector> js;
    std::vector<AnnotationRecord> as;
    for (int d = 0; d < 4; ++d) {
      js.push_back(vector_with("d" + std::to_string(d), d % 2));
      as.push_back(annotation_of(js.back()));
    }
    const auto rows = per_item_metrics(js, as, canonical());
    REQUIRE(rows.size() == 23);
    CHECK(rows.front().item_id == "1.1");
    CHECK(rows.back().item_id == "3.7");
    for (const auto& r : rows) CHECK(r.rates.accuracy == 1.0);
  }
  SUBCASE("planted disagreements on 1.2") {
    // judge/expert pairs for item 1.2: (1,1) (1,0) (0,1) (0,1) (0,0) (1,1)
    const int judge[] = {1, 1, 0, 0, 0, 1};
    const int expert[] = {1, 0, 1, 1, 0, 1};
    std::vector<JudgmentVector> js;
    std::vector<AnnotationRecord> as;
    for (int d = 0; d < 6; ++d) {
      const auto id = "d" + std::to_string(d);
      js.push_back(vector_with(id, 1, {{"1.2", judge[d]}}));
      as.push_back(annotation_of(vector_with(id, 1, {{"1.2", expert[d]}})));
    }
    const auto rows = per_item_metrics(js, as, canonical());
    for (const auto& r : rows) {
      if (r.item_id == "1.2") {
        CHECK(r.confusion == ConfusionMatrix{2, 1, 2, 1});
        CHECK(r.rates.accuracy == doctest::Approx(0.5));
        CHECK(*r.rates.precision == doctest::Approx(2.0 / 3));
        CHECK(*r.rates.recall == doctest::Approx(0.5));
        CHECK(r.primary_id == 1);
      } else {
        CHECK(r.rates.accuracy == 1.0);
      }
    }
  }
  SUBCASE("brute force on random fixtures") {
    std::mt19937_64 rng(17);
    std::bernoulli_distribution coin(0.5);
    std::vector<JudgmentVector> js;
    std::vector<AnnotationRecord> as;
    for (int d = 0; d < 31; ++d) {
      auto j = vector_with("r" + std::to_string(d), 0);
      auto a = vector_with("r" + std::to_string(d), 0);
      for (auto& [_, x] : j.labels) x = coin(rng);
      for (auto& [_, x] : a.labels) x = coin(rng);
      js.push_back(j);
      as.push_back(annotation_of(a));
    }
    for (const auto& row : per_item_metrics(js, as, canonical())) {
      std::vector<int> p, l;
      for (std::size_t d = 0; d < js.size(); ++d) {
        p.push_back(js[d].labels.at(row.item_id));
        l.push_back(as[d].labels.at(row.item_id));
      }
      CHECK(row.confusion == confusion_matrix(p, l));
    }
  }
  SUBCASE("referential integrity") {
    std::vector<JudgmentVector> js{vector_with("ghost", 1)};
    CHECK_THROWS_WITH_AS(per_item_metrics(js, {}, canonical()), doctest::Contains("ghost"), ValidationError);
    auto partial = vector_with("x", 1);
    partial.labels.erase("2.4");
    CHECK_THROWS_AS(per_item_metrics({partial}, {annotation_of(vector_with("x", 1))}, canonical()), ValidationError);
    CHECK_THROWS_AS(per_item_metrics({}, {}, canonical()), ValidationError);
  }
}

TEST_CASE("score_models") {
  SUBCASE("point totals") {
    std::map<std::string, std::vector<JudgmentVector>> per_model;
    for (int d = 0; d < 18; ++d) {
      per_model["all-yes"].push_back(vector_with("y" + std::to_string(d), 1));
      per_model["all-no"].push_back(vector_with("n" + std::to_string(d), 0));
      per_model["mixed"].push_back(vector_with("m" + std::to_string(d), 0, {{"1.1", 1}, {"3.7", d < 9}}));
    }
    const auto scores = score_models(per_model, canonical(), 18);
    REQUIRE(scores.size() == 3);
    CHECK(scores[0].model_name == "all-no");
    CHECK(scores[0].average == 0.0);
    CHECK(scores[0].percentages.at(2) == 0.0);
    CHECK(scores[1].model_name == "all-yes");
    CHECK(scores[1].points.at(1) == 144);
    CHECK(scores[1].points.at(3) == 126);
    CHECK(scores[1].average == 1.0);
    CHECK(scores[2].points.at(1) == 18);
    CHECK(scores[2].points.at(2) == 0);
    CHECK(scores[2].points.at(3) == 9);
    CHECK(scores[2].average == doctest::Approx(27.0 / 414));
    CHECK_FALSE(scores[2].percentages.count(4));
  }
  SUBCASE("errors") {
    std::map<std::string, std::vector<JudgmentVector>> short_model{{"m", {vector_with("a", 1)}}};
    CHECK_THROWS_AS(score_models(short_model, canonical(), 2), ValidationError);
    auto broken = vector_with("b", 1);
    broken.failures.push_back({"1.1", "timeout"});
    std::map<std::string, std::vector<JudgmentVector>> incomplete{{"m", {broken}}};
    CHECK_THROWS_AS(score_models(incomplete, canonical(), 1), ValidationError);
    CHECK_THROWS_AS(score_from_points("m", {{1, 145}}, {{1, 144}}), ValidationError);
    CHECK_THROWS_AS(score_from_points("m", {{1, -1}}, {{1, 144}}), ValidationError);
  }
}

TEST_CASE("format_percent") {
  CHECK(format_percent(51.0 / 144) == "35.42");
  CHECK(format_percent(0.125) == "12.50");
  CHECK(format_percent(0.00125) == "0.13");
  CHECK(format_percent(0.0) == "0.00");
  CHECK(format_percent(1.0) == "100.00");
  CHECK(format_percent(253.0 / 414) == "61.11");
}

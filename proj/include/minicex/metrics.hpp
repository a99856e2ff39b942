#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minicex/corpus.hpp"
#include "minicex/judge.hpp"
#include "minicex/rubric.hpp"

namespace minicex {

/// Counts with label 1 ("criterion satisfied") as the positive class.
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Rates in [0, 1]. A rate whose denominator is zero is std::nullopt.
struct ClassificationRates {
  double accuracy = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels);

/// Throws ValidationError on an all-zero matrix.
ClassificationRates classification_rates(const ConfusionMatrix& m);

/// Harmonic mean; undefined when precision + recall == 0.
std::optional<double> f1_score(double precision, double recall);

struct ItemMetrics {
  std::string item_id;
  int primary_id = 0;
  ConfusionMatrix confusion;
  ClassificationRates rates;
};

/// Judge-vs-expert agreement per scoreable item, in scale order. Every
/// judgment must have an annotation; every pair must carry every item.
std::vector<ItemMetrics> per_item_metrics(const std::vector<JudgmentVector>& judgments,
                                          const std::vector<AnnotationRecord>& annotations,
                                          const RubricScale& scale);

struct ModelScore {
  std::string model_name;
  std::map<int, std::int64_t> points;
  std::map<int, std::int64_t> max_points;
  std::map<int, double> percentages;  // points / max, in [0, 1]
  double average = 0;                 // sum(points) / sum(max)
};

/// Scores from already-summed points. Throws if a point total is negative
/// or exceeds its maximum.
ModelScore score_from_points(const std::string& model, const std::map<int, std::int64_t>& points,
                             const std::map<int, std::int64_t>& maxima);

/// Per-model primary-item scores over `case_count` dialogues each. Output is
/// ordered by model name.
std::vector<ModelScore> score_models(const std::map<std::string, std::vector<JudgmentVector>>& per_model,
                                     const RubricScale& scale, std::int64_t case_count);

/// Fraction rendered as a percentage with two decimals, round-half-up
/// ("0.354166" -> "35.42").
std::string format_percent(double fraction);

}  // namespace minicex

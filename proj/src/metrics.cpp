#include "minicex/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "minicex/error.hpp"
#include "minicex/kernels.hpp"

namespace minicex {

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ValidationError("confusion_matrix: " + std::to_string(predictions.size()) + " predictions vs " +
                          std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) throw ValidationError("confusion_matrix: empty inputs");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i];
    const int l = labels[i];
    if ((p != 0 && p != 1) || (l != 0 && l != 1)) throw ValidationError("confusion_matrix: values must be 0 or 1");
    if (p && l) ++m.tp;
    else if (p) ++m.fp;
    else if (l) ++m.fn;
    else ++m.tn;
  }
  return m;
}

std::optional<double> f1_score(double precision, double recall) {
  if (!(precision + recall > 0)) return std::nullopt;
  return 2.0 * precision * recall / (precision + recall);
}

ClassificationRates classification_rates(const ConfusionMatrix& m) {
  if (m.tp < 0 || m.fp < 0 || m.fn < 0 || m.tn < 0) throw ValidationError("negative confusion count");
  if (m.total() == 0) throw ValidationError("classification_rates: empty confusion matrix");
  ClassificationRates r;
  r.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  if (m.tp + m.fp > 0) r.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0) r.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (r.precision && r.recall) r.f1 = f1_score(*r.precision, *r.recall);
  return r;
}

std::vector<ItemMetrics> per_item_metrics(const std::vector<JudgmentVector>& judgments,
                                          const std::vector<AnnotationRecord>& annotations,
                                          const RubricScale& scale) {
  std::map<std::string, const AnnotationRecord*> by_id;
  for (const auto& a : annotations) by_id[a.dialogue_id] = &a;

  const auto& items = scale.scoreable_ids();
  const std::size_t k = items.size();
  std::vector<std::int8_t> preds(judgments.size() * k);
  std::vector<std::int8_t> labels(judgments.size() * k);
  for (std::size_t r = 0; r < judgments.size(); ++r) {
    const auto& j = judgments[r];
    auto it = by_id.find(j.dialogue_id);
    if (it == by_id.end()) throw ValidationError("no annotation for judged dialogue '" + j.dialogue_id + "'");
    for (std::size_t c = 0; c < k; ++c) {
      auto p = j.labels.find(items[c]);
      auto l = it->second->labels.find(items[c]);
      if (p == j.labels.end()) {
        throw ValidationError("judgment for '" + j.dialogue_id + "' lacks item " + items[c]);
      }
      if (l == it->second->labels.end()) {
        throw ValidationError("annotation for '" + j.dialogue_id + "' lacks item " + items[c]);
      }
      preds[r * k + c] = static_cast<std::int8_t>(p->second);
      labels[r * k + c] = static_cast<std::int8_t>(l->second);
    }
  }
  if (judgments.empty()) throw ValidationError("per_item_metrics: no judgments");

  const auto counts = kernels::item_confusions(preds, labels, k);
  std::vector<ItemMetrics> out;
  out.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    out.push_back({items[c], scale.item(items[c]).primary_id, counts[c], classification_rates(counts[c])});
  }
  return out;
}

ModelScore score_from_points(const std::string& model, const std::map<int, std::int64_t>& points,
                             const std::map<int, std::int64_t>& maxima) {
  ModelScore s;
  s.model_name = model;
  s.max_points = maxima;
  std::int64_t earned = 0;
  std::int64_t available = 0;
  for (const auto& [p, max] : maxima) {
    auto it = points.find(p);
    const std::int64_t pts = it == points.end() ? 0 : it->second;
    if (pts < 0 || pts > max) {
      throw ValidationError(model + ": primary " + std::to_string(p) + " has " + std::to_string(pts) +
                            " points, outside [0, " + std::to_string(max) + "]");
    }
    s.points[p] = pts;
    s.percentages[p] = static_cast<double>(pts) / static_cast<double>(max);
    earned += pts;
    available += max;
  }
  for (const auto& [p, pts] : points) {
    if (!maxima.count(p)) throw ValidationError(model + ": points for non-scoreable primary " + std::to_string(p));
  }
  s.average = available ? static_cast<double>(earned) / static_cast<double>(available) : 0.0;
  return s;
}

std::vector<ModelScore> score_models(const std::map<std::string, std::vector<JudgmentVector>>& per_model,
                                     const RubricScale& scale, std::int64_t case_count) {
  const auto maxima = max_points(scale, case_count);
  std::vector<ModelScore> out;
  for (const auto& [model, vectors] : per_model) {
    if (static_cast<std::int64_t>(vectors.size()) != case_count) {
      throw ValidationError(model + ": " + std::to_string(vectors.size()) + " judgment vectors, expected " +
                            std::to_string(case_count));
    }
    std::map<int, std::int64_t> points;
    for (const auto& [p, max] : maxima) points[p] = 0;
    for (const auto& v : vectors) {
      if (!v.complete()) throw ValidationError(model + ": judgment for '" + v.dialogue_id + "' is incomplete");
      for (const auto& id : scale.scoreable_ids()) {
        auto it = v.labels.find(id);
        if (it == v.labels.end()) {
          throw ValidationError(model + ": judgment for '" + v.dialogue_id + "' lacks item " + id);
        }
        points[scale.item(id).primary_id] += it->second;
      }
    }
    out.push_back(score_from_points(model, points, maxima));
  }
  return out;
}

std::string format_percent(double fraction) {
  // Nudge by a few ulps so exact halves such as 0.125 round up.
  const double hundredths = std::floor(fraction * 10000.0 * (1.0 + 1e-12) + 0.5);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", hundredths / 100.0);
  return buf;
}

}  // namespace minicex

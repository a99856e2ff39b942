#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minicex/linalg.hpp"

namespace minicex {

/// n respondents x k items of 1-5 Likert ratings.
class ResponseMatrix {
 public:
  /// Throws ValidationError unless n >= 2, k >= 2, ids match the column
  /// count, ids are unique and every entry is an integer in 1..5.
  ResponseMatrix(Matrix values, std::vector<std::string> item_ids);

  const Matrix& values() const { return values_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  std::size_t respondents() const { return values_.rows(); }
  std::size_t items() const { return values_.cols(); }

  /// Sub-matrix with the given items, in the order given.
  ResponseMatrix select(const std::vector<std::string>& ids) const;

 private:
  Matrix values_;
  std::vector<std::string> item_ids_;
};

/// Delimiter-separated table, header row = item ids.
ResponseMatrix parse_responses(std::string_view text, char delimiter = ',');
ResponseMatrix read_responses(const std::string& path, char delimiter = ',');

/// k x k, symmetric, unit diagonal.
class CorrelationMatrix {
 public:
  /// Validates symmetry (1e-12), unit diagonal and range.
  explicit CorrelationMatrix(Matrix r);

  const Matrix& values() const { return r_; }
  std::size_t size() const { return r_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return r_(i, j); }

 private:
  Matrix r_;
};

/// Pearson correlations with sample normalization. Throws MathError naming
/// the first zero-variance item.
CorrelationMatrix correlation_matrix(const ResponseMatrix& m);
CorrelationMatrix correlation_matrix(const Matrix& data, const std::vector<std::string>& item_ids = {});

enum class ReliabilityBand { kVeryGood, kAcceptable, kRevisable, kRedesign };
std::string_view to_string(ReliabilityBand band);
ReliabilityBand reliability_band(double alpha);

struct AlphaResult {
  double alpha;
  ReliabilityBand band;
};

/// alpha = k/(k-1) * (1 - sum(item variances) / total variance), sample
/// variances. Accepts any real-valued data so affine properties can be
/// checked. Throws ValidationError for k < 2, MathError for zero total
/// variance.
AlphaResult cronbach_alpha(const Matrix& data);
AlphaResult cronbach_alpha(const ResponseMatrix& m);

/// alpha with each item removed, keyed by item id. Needs k >= 3.
std::map<std::string, double> alpha_if_deleted(const ResponseMatrix& m);
std::vector<double> alpha_if_deleted(const Matrix& data);

/// With Q = R^-1: p_ij = -q_ij / sqrt(q_ii q_jj), unit diagonal. Throws
/// MathError on a singular R.
Matrix partial_correlations(const CorrelationMatrix& r);

enum class KmoAdequacy { kAdequate, kMiddling, kJudgment, kInadequate, kProblematic, kUndefined };
std::string_view to_string(KmoAdequacy a);
KmoAdequacy kmo_adequacy(double statistic);

struct KmoResult {
  /// Empty when every off-diagonal correlation is zero (0/0).
  std::optional<double> statistic;
  KmoAdequacy adequacy = KmoAdequacy::kUndefined;
};

KmoResult kmo(const CorrelationMatrix& r);

struct SphericityResult {
  double chi_square = 0;
  int degrees_of_freedom = 0;
  double p_value = 1;

  bool passes(double significance = 0.05) const { return p_value < significance; }
};

/// chi2 = -(n - 1 - (2k + 5)/6) ln det R, df = k(k-1)/2. Throws
/// ValidationError for n <= k and MathError for det R <= 0.
SphericityResult bartlett_sphericity(const CorrelationMatrix& r, std::size_t respondents);

/// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-square distribution, Q(df/2, x/2).
double chi_square_sf(double x, int df);

}  // namespace minicex

#include "minicex/psychometrics.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "minicex/error.hpp"
#include "minicex/kernels.hpp"
#include "minicex/text.hpp"

namespace minicex {

ResponseMatrix::ResponseMatrix(Matrix values, std::vector<std::string> item_ids)
    : values_(std::move(values)), item_ids_(std::move(item_ids)) {
  if (values_.rows() < 2) throw ValidationError("response matrix needs at least 2 respondents");
  if (values_.cols() < 2) throw ValidationError("response matrix needs at least 2 items");
  if (item_ids_.size() != values_.cols()) throw ValidationError("item id count does not match column count");
  if (std::set<std::string>(item_ids_.begin(), item_ids_.end()).size() != item_ids_.size()) {
    throw ValidationError("duplicate item id in response matrix");
  }
  for (std::size_t r = 0; r < values_.rows(); ++r) {
    for (std::size_t c = 0; c < values_.cols(); ++c) {
      const double v = values_(r, c);
      if (v != std::floor(v) || v < 1 || v > 5) {
        throw ValidationError("respondent " + std::to_string(r + 1) + ", item " + item_ids_[c] +
                              ": rating must be an integer 1-5");
      }
    }
  }
}

ResponseMatrix ResponseMatrix::select(const std::vector<std::string>& ids) const {
  std::vector<std::size_t> cols;
  for (const auto& id : ids) {
    auto it = std::find(item_ids_.begin(), item_ids_.end(), id);
    if (it == item_ids_.end()) throw ValidationError("unknown item '" + id + "' in response matrix");
    cols.push_back(static_cast<std::size_t>(it - item_ids_.begin()));
  }
  return ResponseMatrix(values_.select_columns(cols), ids);
}

namespace {

std::vector<std::string> split(std::string_view line, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = line.find(delimiter, start);
    out.emplace_back(text::trim(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

}  // namespace

ResponseMatrix parse_responses(std::string_view text, char delimiter) {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || text::trim(line).front() == '#') continue;
    auto cells = split(line, delimiter);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()),
                       line_no);
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ParseError("not a number: '" + c + "'", line_no);
      }
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw ParseError("response table has no header row");
  Matrix m(rows.size(), header.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < header.size(); ++c) m(r, c) = rows[r][c];
  }
  return ResponseMatrix(std::move(m), std::move(header));
}

ResponseMatrix read_responses(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_responses(ss.str(), delimiter);
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  }
}

CorrelationMatrix::CorrelationMatrix(Matrix r) : r_(std::move(r)) {
  if (r_.rows() != r_.cols() || r_.rows() < 1) throw ValidationError("correlation matrix must be square");
  for (std::size_t i = 0; i < r_.rows(); ++i) {
    if (r_(i, i) != 1.0) throw ValidationError("correlation matrix diagonal must be 1");
    for (std::size_t j = 0; j < r_.cols(); ++j) {
      if (!(std::abs(r_(i, j)) <= 1.0)) throw ValidationError("correlation outside [-1, 1]");
      if (std::abs(r_(i, j) - r_(j, i)) > 1e-12) throw ValidationError("correlation matrix is not symmetric");
    }
  }
}

CorrelationMatrix correlation_matrix(const Matrix& data, const std::vector<std::string>& item_ids) {
  if (data.rows() < 2) throw ValidationError("correlation needs at least 2 observations");
  const auto vars = kernels::column_variances(data);
  for (std::size_t c = 0; c < vars.size(); ++c) {
    if (!(vars[c] > 0)) {
      const auto name = c < item_ids.size() ? item_ids[c] : "#" + std::to_string(c);
      throw MathError("item " + name + " has zero variance");
    }
  }
  return CorrelationMatrix(kernels::correlation(data));
}

CorrelationMatrix correlation_matrix(const ResponseMatrix& m) { return correlation_matrix(m.values(), m.item_ids()); }

std::string_view to_string(ReliabilityBand band) {
  switch (band) {
    case ReliabilityBand::kVeryGood: return "very good";
    case ReliabilityBand::kAcceptable: return "acceptable";
    case ReliabilityBand::kRevisable: return "revise";
    case ReliabilityBand::kRedesign: return "redesign";
  }
  return "redesign";
}

ReliabilityBand reliability_band(double alpha) {
  if (alpha >= 0.8) return ReliabilityBand::kVeryGood;
  if (alpha >= 0.7) return ReliabilityBand::kAcceptable;
  if (alpha >= 0.6) return ReliabilityBand::kRevisable;
  return ReliabilityBand::kRedesign;
}

AlphaResult cronbach_alpha(const Matrix& data) {
  if (data.cols() < 2) throw ValidationError("Cronbach's alpha needs at least 2 items");
  if (data.rows() < 2) throw ValidationError("Cronbach's alpha needs at least 2 respondents");
  const double a = kernels::alpha_direct(data);
  if (std::isnan(a)) throw MathError("total score has zero variance");
  return {a, reliability_band(a)};
}

AlphaResult cronbach_alpha(const ResponseMatrix& m) { return cronbach_alpha(m.values()); }

std::vector<double> alpha_if_deleted(const Matrix& data) {
  if (data.cols() < 3) throw ValidationError("alpha if item deleted needs at least 3 items");
  return kernels::alpha_if_deleted(data);
}

std::map<std::string, double> alpha_if_deleted(const ResponseMatrix& m) {
  const auto values = alpha_if_deleted(m.values());
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < values.size(); ++i) out[m.item_ids()[i]] = values[i];
  return out;
}

Matrix partial_correlations(const CorrelationMatrix& r) {
  const LuDecomposition lu(r.values());
  if (lu.singular()) {
    throw MathError("correlation matrix is singular (pivot ratio " + std::to_string(lu.pivot_ratio()) + ")");
  }
  const Matrix q = lu.inverse();
  const std::size_t k = r.size();
  Matrix p(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      p(i, j) = i == j ? 1.0 : -q(i, j) / std::sqrt(q(i, i) * q(j, j));
    }
  }
  return p;
}

std::string_view to_string(KmoAdequacy a) {
  switch (a) {
    case KmoAdequacy::kAdequate: return "adequate";
    case KmoAdequacy::kMiddling: return "middling";
    case KmoAdequacy::kJudgment: return "use judgment";
    case KmoAdequacy::kInadequate: return "not adequate";
    case KmoAdequacy::kProblematic: return "problematic";
    case KmoAdequacy::kUndefined: return "undefined";
  }
  return "undefined";
}

KmoAdequacy kmo_adequacy(double statistic) {
  if (statistic >= 0.8) return KmoAdequacy::kAdequate;
  if (statistic >= 0.6) return KmoAdequacy::kMiddling;
  if (statistic >= 0.5) return KmoAdequacy::kJudgment;
  if (statistic >= 0.1) return KmoAdequacy::kInadequate;
  return KmoAdequacy::kProblematic;
}

KmoResult kmo(const CorrelationMatrix& r) {
  const std::size_t k = r.size();
  double r2 = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) r2 += r(i, j) * r(i, j);
  }
  if (r2 == 0.0) return {};
  const Matrix p = partial_correlations(r);
  double p2 = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) p2 += p(i, j) * p(i, j);
  }
  const double stat = r2 / (r2 + p2);
  return {stat, kmo_adequacy(stat)};
}

SphericityResult bartlett_sphericity(const CorrelationMatrix& r, std::size_t respondents) {
  const std::size_t k = r.size();
  if (respondents <= k) {
    throw ValidationError("Bartlett's test needs more respondents (" + std::to_string(respondents) + ") than items (" +
                          std::to_string(k) + ")");
  }
  const double det = determinant(r.values());
  if (!(det > 0)) throw MathError("correlation determinant is not positive (" + std::to_string(det) + ")");
  const double n = static_cast<double>(respondents);
  const double kd = static_cast<double>(k);
  SphericityResult out;
  // ln det R <= 0 for a correlation matrix; clamp rounding noise.
  out.chi_square = std::max(0.0, -(n - 1.0 - (2.0 * kd + 5.0) / 6.0) * std::log(det));
  out.degrees_of_freedom = static_cast<int>(k * (k - 1) / 2);
  out.p_value = out.degrees_of_freedom > 0 ? chi_square_sf(out.chi_square, out.degrees_of_freedom) : 1.0;
  return out;
}

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-16;

// P(a, x) by its power series; converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
}

// Q(a, x) by its continued fraction (modified Lentz); for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(a * std::log(x) - x - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0)) throw ValidationError("regularized gamma: shape must be positive");
  if (!(x >= 0)) throw ValidationError("regularized gamma: x must be non-negative");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw ValidationError("chi-square degrees of freedom must be positive");
  if (!(x >= 0)) throw ValidationError("chi-square statistic must be non-negative");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace minicex

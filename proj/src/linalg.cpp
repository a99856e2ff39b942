#include "minicex/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "minicex/error.hpp"

namespace minicex {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::drop_column(std::size_t c) const {
  Matrix out(rows_, cols_ - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0, k = 0; j < cols_; ++j) {
      if (j != c) out(r, k++) = (*this)(r, j);
    }
  }
  return out;
}

Matrix Matrix::select_columns(std::span<const std::size_t> cols) const {
  Matrix out(rows_, cols.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) out(r, k) = (*this)(r, cols[k]);
  }
  return out;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw ValidationError("matrix dimension mismatch");
  Matrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

LuDecomposition::LuDecomposition(const Matrix& a) : lu_(a), perm_(a.rows()) {
  if (a.rows() != a.cols()) throw ValidationError("LU decomposition needs a square matrix");
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  double min_pivot = std::numeric_limits<double>::infinity();
  double max_pivot = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
    }
    if (p != k) {
      std::swap_ranges(lu_.row(p).begin(), lu_.row(p).end(), lu_.row(k).begin());
      std::swap(perm_[p], perm_[k]);
      sign_ = -sign_;
    }
    const double pivot = lu_(k, k);
    min_pivot = std::min(min_pivot, std::abs(pivot));
    max_pivot = std::max(max_pivot, std::abs(pivot));
    if (std::abs(pivot) < kSingularPivot) {
      singular_ = true;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / pivot;
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
  pivot_ratio_ = max_pivot > 0 ? min_pivot / max_pivot : 0.0;
}

double LuDecomposition::determinant() const {
  if (singular_) return 0.0;
  double det = sign_;
  for (std::size_t i = 0; i < lu_.rows(); ++i) det *= lu_(i, i);
  return det;
}

Matrix LuDecomposition::inverse() const {
  if (singular_) {
    throw MathError("matrix is singular (pivot ratio " + std::to_string(pivot_ratio_) + ")");
  }
  const std::size_t n = lu_.rows();
  Matrix inv(n, n);
  std::vector<double> x(n);
  for (std::size_t col = 0; col < n; ++col) {
    // Solve L y = P e_col, then U x = y.
    for (std::size_t i = 0; i < n; ++i) {
      double s = perm_[i] == col ? 1.0 : 0.0;
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
      x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
      x[i] = s / lu_(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, col) = x[i];
  }
  return inv;
}

double determinant(const Matrix& a) { return LuDecomposition(a).determinant(); }

Matrix inverse(const Matrix& a) { return LuDecomposition(a).inverse(); }

}  // namespace minicex

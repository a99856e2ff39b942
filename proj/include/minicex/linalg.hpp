#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace minicex {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  std::span<const double> data() const { return data_; }

  /// Copy without column `c`.
  Matrix drop_column(std::size_t c) const;
  /// Copy keeping only the listed columns, in that order.
  Matrix select_columns(std::span<const std::size_t> cols) const;

  Matrix operator*(const Matrix& rhs) const;
  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Pivots smaller than this in magnitude mark the matrix singular.
inline constexpr double kSingularPivot = 1e-12;

/// PA = LU with partial pivoting on a square matrix.
class LuDecomposition {
 public:
  explicit LuDecomposition(const Matrix& a);

  bool singular() const { return singular_; }
  /// Smallest |pivot| / largest |pivot|; a rough conditioning indicator.
  double pivot_ratio() const { return pivot_ratio_; }

  double determinant() const;
  /// Throws MathError when singular.
  Matrix inverse() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
  double pivot_ratio_ = 0.0;
};

double determinant(const Matrix& a);
/// Throws MathError (with the pivot ratio) when `a` is singular.
Matrix inverse(const Matrix& a);

}  // namespace minicex

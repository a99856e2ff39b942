#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a serial reference kept for tests and benchmarks.

#include <cstdint>
#include <span>
#include <vector>

#include "minicex/linalg.hpp"
#include "minicex/metrics.hpp"

namespace minicex::kernels {

/// Column means.
std::vector<double> column_means(const Matrix& data);

/// Sample (n-1) variance of each column.
std::vector<double> column_variances(const Matrix& data);

/// Pearson correlation of the columns of `data`, sample normalization.
/// Zero-variance columns yield NaN rows; callers validate first.
Matrix correlation(const Matrix& data);
Matrix correlation_serial(const Matrix& data);

/// Cronbach's alpha of `data` with each column removed in turn. Requires
/// k >= 3. Returns NaN for a deletion whose total variance is zero.
std::vector<double> alpha_if_deleted(const Matrix& data);
std::vector<double> alpha_if_deleted_serial(const Matrix& data);

/// Confusion counts per item. `predictions` and `labels` are row-major
/// (dialogues x items) 0/1 tables of equal shape.
std::vector<ConfusionMatrix> item_confusions(std::span<const std::int8_t> predictions,
                                             std::span<const std::int8_t> labels, std::size_t items);
std::vector<ConfusionMatrix> item_confusions_serial(std::span<const std::int8_t> predictions,
                                                    std::span<const std::int8_t> labels, std::size_t items);

/// Direct alpha formula; NaN when the total-score variance is zero.
double alpha_direct(const Matrix& data);

}  // namespace minicex::kernels

#include "minicex/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minicex/error.hpp"

namespace minicex::kernels {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_variance(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / (n - 1);
}

}  // namespace

std::vector<double> column_means(const Matrix& data) {
  std::vector<double> means(data.cols(), 0.0);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) means[c] += data(r, c);
  }
  for (auto& m : means) m /= static_cast<double>(data.rows());
  return means;
}

std::vector<double> column_variances(const Matrix& data) {
  std::vector<double> out(data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) out[c] = sample_variance(data.column(c));
  return out;
}

Matrix correlation(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t k = data.cols();
  const auto means = column_means(data);
  // Centered columns, stored column-major for contiguous dot products.
  std::vector<double> centered(n * k);
  std::vector<double> norms(k);
  const auto kk = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static)
  for (std::int64_t ci = 0; ci < kk; ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    double ss = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = data(r, c) - means[c];
      centered[c * n + r] = d;
      ss += d * d;
    }
    norms[c] = std::sqrt(ss);
  }
  Matrix out(k, k);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t ii = 0; ii < kk; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    out(i, i) = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      double dot = 0;
      for (std::size_t r = 0; r < n; ++r) dot += centered[i * n + r] * centered[j * n + r];
      const double rij = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
      out(i, j) = rij;
      out(j, i) = rij;
    }
  }
  return out;
}

Matrix correlation_serial(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t k = data.cols();
  Matrix out(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) {
        out(i, j) = 1.0;
        continue;
      }
      double mi = 0, mj = 0;
      for (std::size_t r = 0; r < n; ++r) {
        mi += data(r, i);
        mj += data(r, j);
      }
      mi /= static_cast<double>(n);
      mj /= static_cast<double>(n);
      double sij = 0, sii = 0, sjj = 0;
      for (std::size_t r = 0; r < n; ++r) {
        sij += (data(r, i) - mi) * (data(r, j) - mj);
        sii += (data(r, i) - mi) * (data(r, i) - mi);
        sjj += (data(r, j) - mj) * (data(r, j) - mj);
      }
      out(i, j) = std::clamp(sij / std::sqrt(sii * sjj), -1.0, 1.0);
    }
  }
  return out;
}

double alpha_direct(const Matrix& data) {
  const auto k = static_cast<double>(data.cols());
  double item_var = 0;
  for (std::size_t c = 0; c < data.cols(); ++c) item_var += sample_variance(data.column(c));
  std::vector<double> totals(data.rows(), 0.0);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (double x : data.row(r)) totals[r] += x;
  }
  const double total_var = sample_variance(totals);
  if (!(total_var > 0)) return kNaN;
  return (k / (k - 1.0)) * (1.0 - item_var / total_var);
}

std::vector<double> alpha_if_deleted(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t k = data.cols();
  if (k < 3) throw ValidationError("alpha_if_deleted needs at least 3 items");
  // var(T - x_i) = var(T) + var(x_i) - 2 cov(T, x_i), T the total score.
  std::vector<double> totals(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (double x : data.row(r)) totals[r] += x;
  }
  const double total_mean = [&] {
    double s = 0;
    for (double t : totals) s += t;
    return s / static_cast<double>(n);
  }();
  const double total_var = sample_variance(totals);

  std::vector<double> var(k), cov_total(k);
  const auto kk = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static)
  for (std::int64_t ci = 0; ci < kk; ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    double mean = 0;
    for (std::size_t r = 0; r < n; ++r) mean += data(r, c);
    mean /= static_cast<double>(n);
    double ss = 0, sc = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = data(r, c) - mean;
      ss += d * d;
      sc += d * (totals[r] - total_mean);
    }
    var[c] = ss / static_cast<double>(n - 1);
    cov_total[c] = sc / static_cast<double>(n - 1);
  }
  double var_sum = 0;
  for (double v : var) var_sum += v;

  std::vector<double> out(k);
  const double km1 = static_cast<double>(k - 1);
#pragma omp parallel for schedule(static)
  for (std::int64_t ci = 0; ci < kk; ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    const double rest_var = total_var + var[c] - 2.0 * cov_total[c];
    out[c] = rest_var > 1e-12 * std::max(1.0, total_var) ? (km1 / (km1 - 1.0)) * (1.0 - (var_sum - var[c]) / rest_var)
                                                          : kNaN;
  }
  return out;
}

std::vector<double> alpha_if_deleted_serial(const Matrix& data) {
  if (data.cols() < 3) throw ValidationError("alpha_if_deleted needs at least 3 items");
  std::vector<double> out(data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) out[c] = alpha_direct(data.drop_column(c));
  return out;
}

namespace {

void check_shape(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels, std::size_t items) {
  if (predictions.size() != labels.size()) throw ValidationError("prediction/label tables differ in size");
  if (items == 0 || predictions.size() % items != 0) throw ValidationError("table size is not a multiple of items");
}

void tally(ConfusionMatrix& m, std::int8_t pred, std::int8_t label) {
  if (pred) {
    if (label) ++m.tp; else ++m.fp;
  } else {
    if (label) ++m.fn; else ++m.tn;
  }
}

}  // namespace

std::vector<ConfusionMatrix> item_confusions(std::span<const std::int8_t> predictions,
                                             std::span<const std::int8_t> labels, std::size_t items) {
  check_shape(predictions, labels, items);
  const std::size_t rows = predictions.size() / items;
  std::vector<ConfusionMatrix> out(items);
  const auto ni = static_cast<std::int64_t>(items);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < ni; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    // counts[2 * pred + label]: tn, fn, fp, tp
    std::int64_t counts[4] = {0, 0, 0, 0};
    for (std::size_t r = 0; r < rows; ++r) {
      ++counts[2 * (predictions[r * items + i] != 0) + (labels[r * items + i] != 0)];
    }
    out[i] = ConfusionMatrix{counts[3], counts[2], counts[1], counts[0]};
  }
  return out;
}

std::vector<ConfusionMatrix> item_confusions_serial(std::span<const std::int8_t> predictions,
                                                    std::span<const std::int8_t> labels, std::size_t items) {
  check_shape(predictions, labels, items);
  std::vector<ConfusionMatrix> out(items);
  for (std::size_t idx = 0; idx < predictions.size(); ++idx) tally(out[idx % items], predictions[idx], labels[idx]);
  return out;
}

}  // namespace minicex::kernels

#include <doctest.h>

#include <cmath>
#include <random>

#include "minicex/kernels.hpp"
#include "support.hpp"

namespace k = minicex::kernels;

TEST_CASE("parallel and serial correlation agree with the raw-sums oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 5 + trial * 3;
    const std::size_t cols = 2 + trial % 12;
    const auto g = oracle::random_grid(rng, n, cols, trial % 2 == 0);
    const auto m = support::to_matrix(g);
    bool degenerate = false;
    for (double v : k::column_variances(m)) degenerate = degenerate || v == 0.0;
    if (degenerate) continue;
    const auto par = k::correlation(m);
    const auto ser = k::correlation_serial(m);
    const auto ref = oracle::correlation(g);
    for (std::size_t i = 0; i < cols; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        CHECK(std::abs(par(i, j) - ref[i][j]) < 1e-12);
        CHECK(std::abs(ser(i, j) - ref[i][j]) < 1e-12);
      }
    }
  }
}

TEST_CASE("alpha if deleted: update formula matches recomputation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = oracle::random_grid(rng, 10 + trial, 3 + trial % 10, false);
    const auto m = support::to_matrix(g);
    const auto fast = k::alpha_if_deleted(m);
    const auto slow = k::alpha_if_deleted_serial(m);
    REQUIRE(fast.size() == m.cols());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(support::rel_err(fast[i], slow[i]) < 1e-10);
      CHECK(support::rel_err(fast[i], oracle::alpha(support::to_grid(m.drop_column(i)))) < 1e-10);
    }
  }
}

TEST_CASE("alpha_direct is NaN without total variance") {
  const minicex::Matrix m{{1, 5}, {2, 4}, {3, 3}};
  CHECK(std::isnan(k::alpha_direct(m)));
}

TEST_CASE("item confusion kernels agree") {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution coin(0.6);
  const std::size_t rows = 257, items = 23;
  std::vector<std::int8_t> pred(rows * items), gold(rows * items);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] = coin(rng);
    gold[i] = coin(rng);
  }
  const auto a = k::item_confusions(pred, gold, items);
  const auto b = k::item_confusions_serial(pred, gold, items);
  REQUIRE(a.size() == items);
  for (std::size_t j = 0; j < items; ++j) {
    minicex::ConfusionMatrix ref;
    for (std::size_t r = 0; r < rows; ++r) {
      const int p = pred[r * items + j], g = gold[r * items + j];
      ref.tp += p && g;
      ref.fp += p && !g;
      ref.fn += !p && g;
      ref.tn += !p && !g;
    }
    CHECK(a[j] == ref);
    CHECK(b[j] == ref);
  }
}

TEST_CASE("column statistics") {
  const minicex::Matrix m{{1, 2}, {3, 2}, {5, 2}};
  CHECK(k::column_means(m) == std::vector<double>{3, 2});
  CHECK(k::column_variances(m) == std::vector<double>{4, 0});
}

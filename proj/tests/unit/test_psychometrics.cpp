#include <doctest.h>

#include <cmath>
#include <random>

#include "minicex/error.hpp"
#include "minicex/psychometrics.hpp"
#include "support.hpp"

using namespace minicex;

TEST_CASE("response matrix validation") {
  CHECK_NOTHROW(ResponseMatrix(Matrix{{1, 2}, {5, 4}}, {"a", "b"}));
  CHECK_THROWS_AS(ResponseMatrix(Matrix{{1, 2}}, {"a", "b"}), ValidationError);
  CHECK_THROWS_AS(ResponseMatrix(Matrix{{1}, {2}}, {"a"}), ValidationError);
  CHECK_THROWS_AS(ResponseMatrix(Matrix{{1, 6}, {1, 2}}, {"a", "b"}), ValidationError);
  CHECK_THROWS_AS(ResponseMatrix(Matrix{{1, 2.5}, {1, 2}}, {"a", "b"}), ValidationError);
  CHECK_THROWS_AS(ResponseMatrix(Matrix{{1, 2}, {1, 2}}, {"a", "a"}), ValidationError);
  CHECK_THROWS_AS(ResponseMatrix(Matrix{{1, 2}, {1, 2}}, {"a"}), ValidationError);
}

TEST_CASE("parse_responses") {
  const auto m = parse_responses("1.1, 1.2,1.3\n# comment\n1,2,3\n\n5,4,3\r\n2,2,2\n");
  CHECK(m.item_ids() == std::vector<std::string>{"1.1", "1.2", "1.3"});
  CHECK(m.respondents() == 3);
  CHECK(m.values()(1, 0) == 5);
  CHECK(m.select({"1.3", "1.1"}).values()(0, 0) == 3);
  CHECK_THROWS_AS(m.select({"9.9"}), ValidationError);
  try {
    parse_responses("a,b\n1,2\n3\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_responses("a,b\n1,x\n2,2\n"), ParseError);
  CHECK_THROWS_AS(parse_responses(""), ParseError);
  CHECK_THROWS_AS(parse_responses("a;b\n1;2\n2;3\n", ','), ParseError);
  CHECK(parse_responses("a;b\n1;2\n2;3\n", ';').items() == 2);
}

TEST_CASE("correlation matrix") {
  const auto r = correlation_matrix(Matrix{{1, 2, 1}, {2, 4, 3}, {3, 6, 2}});
  CHECK(r(0, 1) == doctest::Approx(1.0));
  CHECK_THROWS_WITH_AS(correlation_matrix(Matrix{{1, 2}, {2, 2}, {3, 2}}, {"x", "y"}), doctest::Contains("y"),
                       MathError);
  CHECK_THROWS_AS(CorrelationMatrix(Matrix{{1, 0.5}, {0.4, 1}}), ValidationError);
  CHECK_THROWS_AS(CorrelationMatrix(Matrix{{1, 1.5}, {1.5, 1}}), ValidationError);
  CHECK_THROWS_AS(CorrelationMatrix(Matrix{{0.9, 0}, {0, 1}}), ValidationError);
}

TEST_CASE("reliability bands") {
  CHECK(reliability_band(0.8) == ReliabilityBand::kVeryGood);
  CHECK(reliability_band(0.7999) == ReliabilityBand::kAcceptable);
  CHECK(reliability_band(0.7) == ReliabilityBand::kAcceptable);
  CHECK(reliability_band(0.65) == ReliabilityBand::kRevisable);
  CHECK(reliability_band(0.59) == ReliabilityBand::kRedesign);
  CHECK(reliability_band(-1.0) == ReliabilityBand::kRedesign);
}

TEST_CASE("cronbach alpha") {
  SUBCASE("identical columns") {
    const auto a = cronbach_alpha(Matrix{{1, 1, 1}, {3, 3, 3}, {4, 4, 4}, {2, 2, 2}});
    CHECK(a.alpha == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.band == ReliabilityBand::kVeryGood);
  }
  SUBCASE("orthogonal pair") {
    CHECK(std::abs(cronbach_alpha(Matrix{{1, 1}, {2, 3}, {3, 3}, {4, 1}}).alpha) < 1e-12);
  }
  SUBCASE("invariant under a common affine map") {
    std::mt19937_64 rng(21);
    const auto g = oracle::random_grid(rng, 30, 6, false);
    Matrix m = support::to_matrix(g);
    Matrix scaled = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) scaled(r, c) = 3.0 * m(r, c) + 7.0;
    }
    CHECK(cronbach_alpha(scaled).alpha == doctest::Approx(cronbach_alpha(m).alpha).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(cronbach_alpha(Matrix{{1}, {2}}), ValidationError);
    CHECK_THROWS_AS(cronbach_alpha(Matrix{{1, 5}, {2, 4}, {3, 3}}), MathError);
  }
}

TEST_CASE("alpha if deleted by id") {
  const ResponseMatrix m(Matrix{{1, 2, 3}, {2, 3, 3}, {4, 4, 5}, {5, 4, 4}}, {"p", "q", "r"});
  const auto d = alpha_if_deleted(m);
  REQUIRE(d.size() == 3);
  CHECK(d.at("q") == doctest::Approx(oracle::alpha({{1, 3}, {2, 3}, {4, 5}, {5, 4}})));
  CHECK_THROWS_AS(alpha_if_deleted(Matrix{{1, 2}, {2, 1}}), ValidationError);
}

TEST_CASE("kmo") {
  SUBCASE("two variables give one half") {
    for (double r : {-0.9, -0.3, 0.01, 0.5, 0.99}) {
      const auto res = kmo(CorrelationMatrix(Matrix{{1, r}, {r, 1}}));
      REQUIRE(res.statistic);
      CHECK(std::abs(*res.statistic - 0.5) <= 4 * std::numeric_limits<double>::epsilon());
      CHECK(res.adequacy == KmoAdequacy::kJudgment);
    }
  }
  SUBCASE("identity is undefined") {
    const auto res = kmo(CorrelationMatrix(Matrix::identity(4)));
    CHECK_FALSE(res.statistic);
    CHECK(res.adequacy == KmoAdequacy::kUndefined);
  }
  SUBCASE("oracle agreement") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
      const auto g = oracle::random_grid(rng, 60, 3 + trial % 5, false);
      const auto r = correlation_matrix(support::to_matrix(g));
      CHECK(std::abs(*kmo(r).statistic - oracle::kmo(support::to_grid(r.values()))) < 1e-9);
    }
  }
  SUBCASE("bands") {
    CHECK(kmo_adequacy(0.85) == KmoAdequacy::kAdequate);
    CHECK(kmo_adequacy(0.7) == KmoAdequacy::kMiddling);
    CHECK(kmo_adequacy(0.55) == KmoAdequacy::kJudgment);
    CHECK(kmo_adequacy(0.3) == KmoAdequacy::kInadequate);
    CHECK(kmo_adequacy(0.05) == KmoAdequacy::kProblematic);
  }
  SUBCASE("singular") {
    CHECK_THROWS_AS(partial_correlations(CorrelationMatrix(Matrix{{1, 1}, {1, 1}})), MathError);
  }
}

TEST_CASE("bartlett sphericity") {
  const auto id = bartlett_sphericity(CorrelationMatrix(Matrix::identity(26)), 210);
  CHECK(id.degrees_of_freedom == 325);
  CHECK(id.chi_square == 0.0);
  CHECK(id.p_value == 1.0);
  CHECK_FALSE(id.passes());

  const double r = 0.6;
  const auto two = bartlett_sphericity(CorrelationMatrix(Matrix{{1, r}, {r, 1}}), 50);
  const double expected = -(50 - 1 - 9.0 / 6.0) * std::log(1 - r * r);
  CHECK(two.chi_square == doctest::Approx(expected).epsilon(1e-12));
  CHECK(two.degrees_of_freedom == 1);
  CHECK(two.passes());

  CHECK_THROWS_AS(bartlett_sphericity(CorrelationMatrix(Matrix::identity(5)), 5), ValidationError);
  CHECK_THROWS_AS(bartlett_sphericity(CorrelationMatrix(Matrix{{1, 1}, {1, 1}}), 10), MathError);
}

TEST_CASE("chi-square tail") {
  for (int df : {2, 4, 6, 10, 30}) {
    for (double x = 0.0; x <= 80.0; x += 0.7) {
      CHECK(std::abs(chi_square_sf(x, df) - oracle::chi_square_sf_even(x, df)) < 1e-12);
    }
  }
  // df = 1: Q(1/2, x/2) = erfc(sqrt(x/2)).
  for (double x = 0.0; x <= 30.0; x += 0.37) {
    CHECK(std::abs(chi_square_sf(x, 1) - std::erfc(std::sqrt(x / 2))) < 1e-12);
  }
  CHECK(chi_square_sf(325.0, 325) == doctest::Approx(0.4895677791684994).epsilon(1e-9));
  CHECK(chi_square_sf(2343.197, 325) < 1e-6);
  CHECK(chi_square_sf(0.0, 5) == 1.0);
  CHECK_THROWS_AS(chi_square_sf(-1.0, 3), ValidationError);
  CHECK_THROWS_AS(chi_square_sf(1.0, 0), ValidationError);
  CHECK_THROWS_AS(regularized_gamma_q(0.0, 1.0), ValidationError);
}

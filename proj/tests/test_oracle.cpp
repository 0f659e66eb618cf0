#include <cmath>

#include "oracle/oracle.hpp"
#include "support.hpp"

using namespace s2gsl;
using oracle::Grid;

TEST_SUITE("oracle") {

TEST_CASE("one node") {
  const auto s = oracle::enumerate_arborescences({{0.0}}, {2.5});
  CHECK(s.partition == 2.5);
  CHECK(s.root_probs == std::vector<double>{1.0});
  CHECK(s.count == 1);
}

TEST_CASE("two nodes with uniform weights") {
  const auto s = oracle::enumerate_arborescences({{0, 1}, {1, 0}}, {1, 1});
  CHECK(s.partition == 2.0);
  CHECK(s.root_probs == std::vector<double>{0.5, 0.5});
  CHECK(s.edge_marginals[0][1] == 0.5);
  CHECK(s.edge_marginals[1][0] == 0.5);
}

TEST_CASE("unit weights count n^(n-1) rooted trees") {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto s = oracle::enumerate_arborescences(Grid(n, std::vector<double>(n, 1.0)), std::vector<double>(n, 1.0));
    const double cayley = std::pow(static_cast<double>(n), static_cast<double>(n - 1));
    CAPTURE(n);
    CHECK(s.count == static_cast<std::size_t>(cayley));
    CHECK(s.partition == cayley);
  }
}

TEST_CASE("every node has exactly one parent or is the root") {
  SeededStream rng(2, "oracle-laws");
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.below(4);
    Grid w(n, std::vector<double>(n));
    std::vector<double> r(n);
    for (auto& row : w)
      for (auto& v : row) v = rng.next_unit();
    for (auto& v : r) v = rng.next_unit() + 0.01;
    const auto s = oracle::enumerate_arborescences(w, r);
    double root_sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      root_sum += s.root_probs[j];
      double parents = s.root_probs[j];
      for (std::size_t i = 0; i < n; ++i) parents += s.edge_marginals[i][j];
      CHECK(parents == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(s.edge_marginals[j][j] == 0.0);
    }
    CHECK(root_sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("enumeration rejects bad inputs") {
  CHECK_THROWS_AS(oracle::enumerate_arborescences({{0, 0}, {0, 0}}, {0, 0}), ValidationError);
  CHECK_THROWS_AS(oracle::enumerate_arborescences({{0, -1}, {1, 0}}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(oracle::enumerate_arborescences({{0, 1}}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(oracle::enumerate_arborescences(Grid(9, std::vector<double>(9, 1)), std::vector<double>(9, 1)),
                  ValidationError);
}

TEST_CASE("hard bands") {
  CHECK(oracle::hard_segment_band({0, 1, 2}, {0, 1, 2}) == Grid{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK(oracle::hard_segment_band({0, 0, 0}, {2, 2, 2}) == Grid(3, std::vector<double>(3, 1.0)));
  CHECK(oracle::hard_segment_band({0, 0, 2}, {1, 2, 2}) == Grid{{1, 1, 0}, {1, 1, 1}, {0, 0, 1}});
  CHECK_THROWS_AS(oracle::hard_segment_band({1, 0}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(oracle::hard_segment_band({0, 0}, {0, 2}), ValidationError);
  CHECK_THROWS_AS(oracle::hard_segment_band({0}, {0, 1}), ValidationError);
}

TEST_CASE("micro losses") {
  CHECK(oracle::micro_loss("ce_uniform3") == doctest::Approx(1.0986).epsilon(1e-4));
  CHECK(oracle::micro_loss("bce_sigmoid0_one") == std::log(2.0));
  CHECK(oracle::micro_loss("root_bce_n2") == 2 * std::log(2.0));
  CHECK(oracle::micro_loss("ce_p0.9") == doctest::Approx(0.1054).epsilon(1e-3));
  CHECK(oracle::micro_loss("bce_sigmoid2_one") == doctest::Approx(0.1269).epsilon(1e-3));
  CHECK(oracle::micro_loss("total_1_0.5_0.2") == 1.15);
  CHECK(oracle::micro_loss_names().size() == 6);
  CHECK_THROWS_AS(oracle::micro_loss("nope"), ValidationError);
}

}  // TEST_SUITE

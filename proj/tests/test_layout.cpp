#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <set>

#include "ftsynth/layout.hpp"

using namespace ftsynth;

namespace {

// Closed-form oracle for grid distances, independent of the BFS path.
int manhattan(const QubitLayout& l, int a, int b) {
  return std::abs(l.row_of(a) - l.row_of(b)) + std::abs(l.col_of(a) - l.col_of(b));
}

}  // namespace

TEST_CASE("build_layout basics") {
  auto one = build_layout(1, 1);
  CHECK(one.size() == 1);
  CHECK(one.neighbors(0).empty());

  auto l = build_layout(5, 7);
  CHECK(l.size() == 35);
  CHECK(l.neighbors(0) == std::vector<int>{1, 7});

  auto sq = build_layout(2, 2);
  std::set<std::pair<int, int>> pairs;
  for (int q = 0; q < sq.size(); ++q) {
    for (int nb : sq.neighbors(q)) {
      pairs.insert({std::min(q, nb), std::max(q, nb)});
    }
  }
  CHECK(pairs == std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 3}, {2, 3}});

  CHECK_THROWS_AS(build_layout(0, 7), std::invalid_argument);
  CHECK_THROWS_AS(build_layout(3, 0), std::invalid_argument);
}

TEST_CASE("parse_layout_spec") {
  auto l = parse_layout_spec("5x7");
  CHECK(l.rows == 5);
  CHECK(l.cols == 7);
  CHECK_THROWS_AS(parse_layout_spec("0x7"), std::invalid_argument);
  CHECK_THROWS_AS(parse_layout_spec("5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_layout_spec("5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_layout_spec("ax7"), std::invalid_argument);
}

TEST_CASE("distance_matrix examples") {
  auto sq = build_layout(2, 2);
  auto d2 = distance_matrix(sq);
  CHECK(d2(0, 3) == 2);

  auto l = build_layout(5, 7);
  auto d = distance_matrix(l);
  CHECK(d(0, 34) == 10);
  for (int q = 0; q < l.size(); ++q) CHECK(d(q, q) == 0);
}

TEST_CASE("distance_matrix equals Manhattan distance on all grids up to 8x8") {
  for (int rows = 1; rows <= 8; ++rows) {
    for (int cols = 1; cols <= 8; ++cols) {
      auto l = build_layout(rows, cols);
      auto d = distance_matrix(l);
      for (int a = 0; a < l.size(); ++a) {
        for (int b = 0; b < l.size(); ++b) {
          REQUIRE(d(a, b) == manhattan(l, a, b));
          REQUIRE(d(a, b) == d(b, a));
          REQUIRE((d(a, b) == 1) == l.adjacent(a, b));
        }
      }
    }
  }
}

TEST_CASE("extend_layout relabeling") {
  auto base = build_layout(2, 2);

  SECTION("vertical") {
    auto [ext, plan] = extend_layout(base, ExtendDirection::vertical);
    CHECK(ext.rows == 4);
    CHECK(ext.cols == 2);
    CHECK(plan.block1[0] == 4);
    for (int q = 0; q < base.size(); ++q) CHECK(plan.block0[q] == q);
  }

  SECTION("horizontal") {
    auto [ext, plan] = extend_layout(base, ExtendDirection::horizontal);
    CHECK(ext.rows == 2);
    CHECK(ext.cols == 4);
    CHECK(plan.block1[0] == 2);
    CHECK(plan.block1[2] == 6);
    CHECK(plan.block0[2] == 4);  // cell (1,0) recomputed against the wider grid
  }
}

TEST_CASE("extension preserves intra-block offsets and partitions the grid") {
  for (auto dir : {ExtendDirection::vertical, ExtendDirection::horizontal}) {
    for (int rows : {1, 2, 3, 5}) {
      for (int cols : {1, 2, 4, 7}) {
        auto base = build_layout(rows, cols);
        auto [ext, plan] = extend_layout(base, dir);

        std::set<int> image;
        for (int q = 0; q < base.size(); ++q) {
          image.insert(plan.block0[q]);
          image.insert(plan.block1[q]);
        }
        REQUIRE(static_cast<int>(image.size()) == 2 * base.size());
        REQUIRE(*image.begin() == 0);
        REQUIRE(*image.rbegin() == ext.size() - 1);

        // (r, c) offsets within a block survive relabeling, so base-grid
        // Manhattan distances are reproduced exactly inside each block.
        for (int a = 0; a < base.size(); ++a) {
          for (int b = 0; b < base.size(); ++b) {
            const int want = std::abs(base.row_of(a) - base.row_of(b)) +
                             std::abs(base.col_of(a) - base.col_of(b));
            REQUIRE(manhattan(ext, plan.block0[a], plan.block0[b]) == want);
            REQUIRE(manhattan(ext, plan.block1[a], plan.block1[b]) == want);
          }
        }
      }
    }
  }
}

#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "pfsensor/grid.hpp"
#include "random_models.hpp"

using namespace pfsensor;

TEST_CASE("state_index numbers cells x fastest") {
  const StructuredGrid g2({2, 2, 1}, {1, 1, 1});
  CHECK(g2.state_index({0, 0, 0}) == 0);
  CHECK(g2.state_index({1, 1, 0}) == 3);

  const StructuredGrid g3({3, 2, 2}, {1, 1, 1});
  CHECK(g3.state_index({2, 1, 1}) == 11);
  CHECK(g3.cell_index(11) == CellIndex{2, 1, 1});
}

TEST_CASE("state_index rejects coordinates outside the grid") {
  const StructuredGrid g({3, 2, 2}, {1, 1, 1});
  CHECK_THROWS_AS(g.state_index({3, 0, 0}), std::out_of_range);
  CHECK_THROWS_AS(g.state_index({0, 2, 0}), std::out_of_range);
  CHECK_THROWS_AS(g.state_index({0, 0, 2}), std::out_of_range);
  CHECK_THROWS_AS(g.cell_index(12), std::out_of_range);
}

TEST_CASE("grid construction is validated") {
  CHECK_THROWS_AS(StructuredGrid({0, 1, 1}, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(StructuredGrid({1, 1, 1}, {1, -1, 1}), std::invalid_argument);
}

TEST_CASE("index bijection holds on random grids") {
  testing::Rng rng(testing::test_seed(11));
  for (int trial = 0; trial < 50; ++trial) {
    const StructuredGrid g({testing::uniform_size(rng, 1, 9), testing::uniform_size(rng, 1, 9),
                            testing::uniform_size(rng, 1, 4)},
                           {testing::uniform(rng, 0.1, 2), testing::uniform(rng, 0.1, 2), testing::uniform(rng, 0.1, 2)});
    for (StateIndex k = 0; k < g.num_states(); ++k) CHECK(g.state_index(g.cell_index(k)) == k);
    CHECK(g.total_volume() == doctest::Approx(g.num_states() * g.cell_volume(0)).epsilon(1e-12));
  }
}

TEST_CASE("neighbor stops at the boundary") {
  const StructuredGrid g({3, 2, 1}, {1, 1, 1});
  StateIndex n = 0;
  CHECK_FALSE(g.neighbor(0, Face::kXMinus, n));
  REQUIRE(g.neighbor(0, Face::kXPlus, n));
  CHECK(n == 1);
  REQUIRE(g.neighbor(0, Face::kYPlus, n));
  CHECK(n == 3);
  CHECK_FALSE(g.neighbor(0, Face::kZPlus, n));
}

TEST_CASE("box_mask selects cells by center") {
  const StructuredGrid unit({2, 2, 1}, {0.5, 0.5, 1});
  CHECK(box_mask(unit, {0, 0, 0}, {1, 1, 1}).size() == 4);
  CHECK(box_mask(unit, {-3, -3, -3}, {-2, -2, -2}).empty());

  const StructuredGrid g({4, 4, 1}, {1, 1, 1});
  const ZoneMask m = box_mask(g, {0, 0, 0}, {2, 2, 1});
  CHECK(m.members() == std::vector<StateIndex>{0, 1, 4, 5});

  CHECK_THROWS_AS(box_mask(g, {1, 0, 0}, {0, 1, 1}), std::invalid_argument);
}

TEST_CASE("mask complement partitions the states") {
  testing::Rng rng(testing::test_seed(12));
  const StructuredGrid g({5, 4, 2}, {1, 1, 1});
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<StateIndex> states;
    for (StateIndex k = 0; k < g.num_states(); ++k) {
      if (testing::uniform(rng, 0, 1) < 0.3) states.push_back(k);
    }
    const ZoneMask m(g, states);
    const ZoneMask c = m.complement();
    CHECK(m.size() + c.size() == g.num_states());
    for (StateIndex k = 0; k < g.num_states(); ++k) CHECK(m.contains(k) != c.contains(k));
    CHECK(m.united(c) == ZoneMask::all(g));
  }
  CHECK_THROWS_AS(ZoneMask(g, {g.num_states()}), std::out_of_range);
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pfsensor/text_io.hpp"
#include "pfsensor/tracking.hpp"
#include "random_models.hpp"

using namespace pfsensor;

namespace {

MarkovMatrix two_state() {
  MarkovMatrix::Storage s(2, 2);
  s.insert(0, 0) = 0.9;
  s.insert(0, 1) = 0.1;
  s.insert(1, 0) = 0.1;
  s.insert(1, 1) = 0.9;
  s.makeCompressed();
  return MarkovMatrix(std::move(s), 1.0);
}

BinaryTrackingMatrix full(std::size_t n) {
  std::vector<std::pair<StateIndex, StateIndex>> pairs;
  for (StateIndex i = 0; i < n; ++i) {
    for (StateIndex j = 0; j < n; ++j) pairs.emplace_back(i, j);
  }
  return BinaryTrackingMatrix::from_pairs(n, pairs);
}

using Pairs = std::vector<std::pair<StateIndex, StateIndex>>;

}  // namespace

TEST_CASE("tracking_matrix sums powers of P") {
  const TrackingMatrix q0 = tracking_matrix(two_state(), 0);
  CHECK(q0.coeff(0, 0) == 1.0);
  CHECK(q0.coeff(0, 1) == 0.0);

  const TrackingMatrix q_id = tracking_matrix(MarkovMatrix::identity(3, 1.0), 3);
  for (StateIndex i = 0; i < 3; ++i) CHECK(q_id.coeff(i, i) == 4.0);
  CHECK(q_id.nnz() == 3);

  const TrackingMatrix q = tracking_matrix(two_state(), 2);
  CHECK(q.coeff(0, 0) == doctest::Approx(2.72).epsilon(1e-14));
  CHECK(q.coeff(0, 1) == doctest::Approx(0.28).epsilon(1e-14));
  CHECK(q.coeff(1, 0) == doctest::Approx(0.28).epsilon(1e-14));
  CHECK(q.coeff(1, 1) == doctest::Approx(2.72).epsilon(1e-14));
  CHECK(q.horizon_steps() == 2);
  CHECK(q.horizon() == 2.0);
}

TEST_CASE("tracking rows sum to m + 1 and stay bounded") {
  testing::Rng rng(testing::test_seed(41));
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = testing::uniform_size(rng, 2, 30);
    const std::size_t m = testing::uniform_size(rng, 0, 12);
    const TrackingMatrix q = tracking_matrix(testing::random_markov(rng, n, 2), m);
    for (Eigen::Index i = 0; i < q.entries().outerSize(); ++i) {
      double sum = 0.0;
      for (TrackingMatrix::Storage::InnerIterator it(q.entries(), i); it; ++it) {
        CHECK(it.value() >= 0.0);
        CHECK(it.value() <= m + 1 + 1e-9);
        sum += it.value();
      }
      CHECK(std::abs(sum - static_cast<double>(m + 1)) <= 1e-9);
      CHECK(q.coeff(i, i) >= 1.0);
    }
  }
}

TEST_CASE("threshold against the normalized detection level") {
  const TrackingMatrix q = tracking_matrix(two_state(), 2);
  CHECK(threshold(q, SensorSpec(0.05)).nnz() == 4);
  CHECK(threshold(q, SensorSpec(0.1)).pairs() == Pairs{{0, 0}, {1, 1}});
  CHECK(threshold(q, SensorSpec(0.0)).nnz() == 4);
  CHECK(threshold(q, SensorSpec(1.0)).nnz() == 0);
  CHECK(threshold(tracking_matrix(MarkovMatrix::identity(3, 1.0), 4), SensorSpec(1.0)).nnz() == 3);

  // Raw mode compares to eps directly: 0.28 >= 0.25 keeps every pair.
  CHECK(threshold(q, SensorSpec(0.25, ThresholdMode::kRaw)).nnz() == 4);
  CHECK(threshold(q, SensorSpec(0.3, ThresholdMode::kRaw)).nnz() == 2);

  CHECK_THROWS_AS(SensorSpec(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(SensorSpec(1.5), std::invalid_argument);
}

TEST_CASE("raising the threshold never adds pairs") {
  testing::Rng rng(testing::test_seed(42));
  for (int trial = 0; trial < 10; ++trial) {
    const TrackingMatrix q = tracking_matrix(testing::random_markov(rng, 15, 3), 5);
    double lo = testing::uniform(rng, 0, 0.5);
    const double hi = lo + testing::uniform(rng, 0, 0.5);
    const BinaryTrackingMatrix a = threshold(q, SensorSpec(lo));
    const BinaryTrackingMatrix b = threshold(q, SensorSpec(hi));
    for (const auto& [i, j] : b.pairs()) CHECK(a.contains(i, j));
  }
}

TEST_CASE("apply_constraints") {
  const StructuredGrid g({3, 1, 1}, {1, 1, 1});
  const BinaryTrackingMatrix qb = full(3);
  CHECK(apply_constraints(qb, ConstraintSet::none(g)) == qb);
  CHECK(apply_constraints(qb, {ZoneMask::all(g), ZoneMask(g)}).nnz() == 0);
  const ConstraintSet c{ZoneMask(g, {1}), ZoneMask(g, {2})};
  CHECK(apply_constraints(qb, c).pairs() == Pairs{{0, 0}, {0, 2}, {1, 0}, {1, 2}});
}

TEST_CASE("constraints are idempotent and drop the outlet state") {
  testing::Rng rng(testing::test_seed(43));
  const StructuredGrid g({4, 3, 1}, {1, 1, 1});
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryTrackingMatrix qb = testing::random_pattern(rng, g.num_states() + 1, 0.3);
    std::vector<StateIndex> forbid, ignore;
    for (StateIndex k = 0; k < g.num_states(); ++k) {
      if (testing::uniform(rng, 0, 1) < 0.25) forbid.push_back(k);
      if (testing::uniform(rng, 0, 1) < 0.25) ignore.push_back(k);
    }
    const ConstraintSet c{ZoneMask(g, forbid), ZoneMask(g, ignore)};
    const BinaryTrackingMatrix once = apply_constraints(qb, c);
    CHECK(apply_constraints(once, c) == once);
    for (const auto& [i, j] : once.pairs()) {
      CHECK(i < g.num_states());
      CHECK(j < g.num_states());
      CHECK_FALSE(c.forbidden_locations.contains(j));
      CHECK_FALSE(c.sensing_ignore.contains(i));
    }
  }
}

TEST_CASE("volumetric_scale") {
  const StructuredGrid g({5, 1, 1}, {1, 1, 1});
  const ScaledTrackingMatrix s = volumetric_scale(full(5), g);
  for (StateIndex j = 0; j < 5; ++j) {
    double column = 0.0;
    for (StateIndex i = 0; i < 5; ++i) {
      CHECK(s.coeff(i, j) == doctest::Approx(0.2).epsilon(1e-15));
      column += s.coeff(i, j);
    }
    CHECK(column == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(volumetric_scale(BinaryTrackingMatrix(5), g).nnz() == 0);
  CHECK_THROWS_AS(volumetric_scale(full(7), g), std::invalid_argument);
}

TEST_CASE("tracking files round-trip") {
  testing::Rng rng(testing::test_seed(44));
  const TrackingMatrix q = tracking_matrix(testing::random_markov(rng, 9, 3, 0.3), 4);
  std::stringstream buf;
  write_tracking(buf, q);
  const TrackingMatrix r = read_tracking(buf);
  CHECK(r.horizon_steps() == 4);
  CHECK(r.dt() == 0.3);
  for (StateIndex i = 0; i < 9; ++i) {
    for (StateIndex j = 0; j < 9; ++j) CHECK(r.coeff(i, j) == q.coeff(i, j));
  }

  const BinaryTrackingMatrix qb = threshold(q, SensorSpec(0.01));
  std::stringstream bbuf;
  write_binary_tracking(bbuf, qb);
  CHECK(read_binary_tracking(bbuf) == qb);

  std::istringstream bad("# pfsensor-tracking-binary v1\n2 1\n0 5\n");
  CHECK_THROWS_AS(read_binary_tracking(bad), ParseError);
}

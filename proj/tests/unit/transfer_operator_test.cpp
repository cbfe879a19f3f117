#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pfsensor/text_io.hpp"
#include "pfsensor/transfer_operator.hpp"
#include "random_models.hpp"

using namespace pfsensor;

namespace {

FlowScenario uniform_x_flow(std::size_t n, double u, double diffusivity) {
  const StructuredGrid g({n, 1, 1}, {1, 1, 1});
  return FlowScenario(VelocityField(g, std::vector<double>(n, u), std::vector<double>(n, 0.0),
                                    std::vector<double>(n, 0.0)),
                      diffusivity);
}

void check_stochastic(const MarkovMatrix& p) {
  for (StateIndex i = 0; i < p.n_states(); ++i) CHECK(std::abs(p.row_sum(i) - 1.0) <= 1e-12);
  for (Eigen::Index i = 0; i < p.entries().outerSize(); ++i) {
    for (MarkovMatrix::Storage::InnerIterator it(p.entries(), i); it; ++it) {
      CHECK(it.value() >= 0.0);
      CHECK(it.value() <= 1.0);
    }
  }
}

}  // namespace

TEST_CASE("no transport gives the identity") {
  const StructuredGrid g({3, 3, 1}, {1, 1, 1});
  const MarkovMatrix p = build_markov(FlowScenario(VelocityField(g), 0.0), 0.5);
  for (StateIndex i = 0; i < 9; ++i) {
    for (StateIndex j = 0; j < 9; ++j) CHECK(p.coeff(i, j) == (i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("two-cell diffusion") {
  const MarkovMatrix p = build_markov(uniform_x_flow(2, 0.0, 0.1), 1.0);
  CHECK(p.coeff(0, 0) == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(p.coeff(0, 1) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(p.coeff(1, 0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(p.coeff(1, 1) == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("three-cell rightward advection with a closed end") {
  const MarkovMatrix p = build_markov(uniform_x_flow(3, 0.25, 0.0), 1.0);
  CHECK(p.coeff(0, 0) == 0.75);
  CHECK(p.coeff(0, 1) == 0.25);
  CHECK(p.coeff(0, 2) == 0.0);
  CHECK(p.coeff(1, 1) == 0.75);
  CHECK(p.coeff(1, 2) == 0.25);
  CHECK(p.coeff(2, 0) == 0.0);
  CHECK(p.coeff(2, 1) == 0.0);
  CHECK(p.coeff(2, 2) == 1.0);
}

TEST_CASE("outlet faces drain into an absorbing state") {
  BoundarySpec b;
  b.faces[static_cast<int>(Face::kXPlus)] = BoundaryKind::kOutlet;
  const MarkovMatrix p = build_markov(uniform_x_flow(3, 0.25, 0.0), 1.0, b);
  REQUIRE(p.n_states() == 4);
  CHECK(p.coeff(2, 2) == 0.75);
  CHECK(p.coeff(2, 3) == 0.25);
  CHECK(p.coeff(3, 3) == 1.0);
}

TEST_CASE("stability violations report the admissible step") {
  const FlowScenario s = uniform_x_flow(4, 0.5, 0.1);
  const double adm = admissible_dt(s);
  CHECK(adm == doctest::Approx(1.0 / 0.7));
  try {
    build_markov(s, 2.0);
    FAIL("expected StabilityError");
  } catch (const StabilityError& e) {
    CHECK(e.requested_dt() == 2.0);
    CHECK(e.admissible_dt() == doctest::Approx(adm).epsilon(1e-15));
    check_stochastic(build_markov(s, e.admissible_dt()));
  }
  CHECK_THROWS_AS(build_markov(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(FlowScenario(s.field, -1.0), std::invalid_argument);
}

TEST_CASE("built operators are row-stochastic") {
  testing::Rng rng(testing::test_seed(31));
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = testing::uniform_size(rng, 2, 20);
    const StructuredGrid g({n, n, 1}, {1.0 / n, 1.0 / n, 1});
    const FlowScenario s(synth_recirculating(g, testing::uniform(rng, -2, 2)), testing::uniform(rng, 0, 1e-3));
    check_stochastic(build_markov(s, testing::uniform(rng, 0.05, 1.0) * admissible_dt(s)));
  }
}

TEST_CASE("propagate") {
  testing::Rng rng(testing::test_seed(32));
  const MarkovMatrix p = testing::random_markov(rng, 8, 3);
  std::vector<double> values(8);
  for (double& v : values) v = testing::uniform(rng, 0, 1);
  const ConcentrationField phi(values);

  CHECK(propagate(phi, p, SourceTerm::none(8), 0).values() == values);
  CHECK(propagate(phi, MarkovMatrix::identity(8, 1.0), SourceTerm::none(8), 17).values() == values);
  CHECK(propagate(phi, p, SourceTerm::none(8), 100).total() == doctest::Approx(phi.total()).epsilon(1e-12));

  const ConcentrationField fed = propagate(ConcentrationField::zeros(8), MarkovMatrix::identity(8, 1.0),
                                           SourceTerm(std::vector<double>(8, 0.5)), 4);
  CHECK(fed.values() == std::vector<double>(8, 2.0));

  CHECK_THROWS_AS(propagate(ConcentrationField::zeros(3), p, SourceTerm::none(8), 1), std::invalid_argument);
  CHECK_THROWS_AS(ConcentrationField({-1.0}), std::invalid_argument);
}

TEST_CASE("expected_operator is the weighted sum") {
  testing::Rng rng(testing::test_seed(33));
  const MarkovMatrix p1 = testing::random_markov(rng, 4, 3);
  const MarkovMatrix p2 = testing::random_markov(rng, 4, 3);

  const std::vector<MarkovMatrix> one{p1};
  const MarkovMatrix same = expected_operator(one, std::vector<double>{1.0});
  for (StateIndex i = 0; i < 4; ++i) {
    for (StateIndex j = 0; j < 4; ++j) CHECK(same.coeff(i, j) == p1.coeff(i, j));
  }

  const std::vector<MarkovMatrix> twins{p1, p1};
  const MarkovMatrix twin = expected_operator(twins, std::vector<double>{0.4, 0.6});
  for (StateIndex i = 0; i < 4; ++i) {
    for (StateIndex j = 0; j < 4; ++j) CHECK(twin.coeff(i, j) == doctest::Approx(p1.coeff(i, j)).epsilon(1e-15));
  }

  const std::vector<MarkovMatrix> pair{p1, p2};
  const MarkovMatrix mix = expected_operator(pair, std::vector<double>{0.3, 0.7});
  for (StateIndex i = 0; i < 4; ++i) {
    CHECK(std::abs(mix.row_sum(i) - 1.0) <= 1e-12);
    for (StateIndex j = 0; j < 4; ++j) {
      CHECK(mix.coeff(i, j) == doctest::Approx(0.3 * p1.coeff(i, j) + 0.7 * p2.coeff(i, j)).epsilon(1e-14));
    }
  }

  // One step through the mixture equals the weighted mix of single steps.
  const ConcentrationField phi({0.1, 0.7, 0.0, 0.2});
  const auto a = propagate(phi, p1, SourceTerm::none(4), 1).values();
  const auto b = propagate(phi, p2, SourceTerm::none(4), 1).values();
  const auto c = propagate(phi, mix, SourceTerm::none(4), 1).values();
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(c[k] - (0.3 * a[k] + 0.7 * b[k])) <= 1e-12);

  CHECK_THROWS_AS(expected_operator(pair, std::vector<double>{0.3, 0.6}), std::invalid_argument);
  const std::vector<MarkovMatrix> mismatched{p1, MarkovMatrix::identity(5, 1.0)};
  CHECK_THROWS_AS(expected_operator(mismatched, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  const std::vector<MarkovMatrix> other_dt{p1, MarkovMatrix::identity(4, 2.0)};
  CHECK_THROWS_AS(expected_operator(other_dt, std::vector<double>{0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("matrix files") {
  testing::Rng rng(testing::test_seed(34));
  const MarkovMatrix p = testing::random_markov(rng, 12, 4, 0.125);
  std::stringstream buf;
  write_markov(buf, p);
  const MarkovMatrix q = read_markov(buf);
  CHECK(q.dt() == p.dt());
  CHECK(q.nnz() == p.nnz());
  for (StateIndex i = 0; i < 12; ++i) {
    for (StateIndex j = 0; j < 12; ++j) CHECK(q.coeff(i, j) == p.coeff(i, j));
  }

  SUBCASE("rows need not be contiguous") {
    std::istringstream in("# pfsensor-markov v1\n2 3 1\n1 1 1\n0 1 0.25\n0 0 0.75\n");
    CHECK(read_markov(in).coeff(0, 1) == 0.25);
  }
  SUBCASE("row-sum violation") {
    std::istringstream in("# pfsensor-markov v1\n2 3 1\n0 0 0.7\n0 1 0.25\n1 1 1\n");
    CHECK_THROWS_AS(read_markov(in), ParseError);
  }
  SUBCASE("index out of range") {
    std::istringstream in("# pfsensor-markov v1\n2 2 1\n0 0 1\n1 2 1\n");
    CHECK_THROWS_AS(read_markov(in), ParseError);
  }
  SUBCASE("nnz mismatch") {
    std::istringstream in("# pfsensor-markov v1\n2 3 1\n0 0 1\n1 1 1\n");
    CHECK_THROWS_AS(read_markov(in), ParseError);
  }
}

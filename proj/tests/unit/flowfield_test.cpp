#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pfsensor/flowfield.hpp"
#include "pfsensor/text_io.hpp"
#include "random_models.hpp"

using namespace pfsensor;

namespace {

// Max |du/dx + dv/dy| over interior cells, central differences.
double max_interior_divergence(const VelocityField& f) {
  const StructuredGrid& g = f.grid();
  const double dx = g.spacing()[0];
  const double dy = g.spacing()[1];
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const double dudx = (f.u()[g.state_index({i + 1, j, 0})] - f.u()[g.state_index({i - 1, j, 0})]) / (2 * dx);
      const double dvdy = (f.v()[g.state_index({i, j + 1, 0})] - f.v()[g.state_index({i, j - 1, 0})]) / (2 * dy);
      worst = std::max(worst, std::abs(dudx + dvdy));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("load_field reads a minimal file") {
  std::istringstream in("# pfsensor-field v1\n2 1 1\n1.0 1.0 1.0\n0 0 0\n0.5 0 0\n-0.25 1e-3 0\n");
  const VelocityField f = read_field(in);
  CHECK(f.grid().num_states() == 2);
  CHECK(f.u()[1] == -0.25);
  CHECK(f.v()[1] == 1e-3);
}

TEST_CASE("load_field reports the failing line") {
  SUBCASE("truncated") {
    std::istringstream in("# pfsensor-field v1\n2 1 1\n1 1 1\n0 0 0\n0.5 0 0\n");
    CHECK_THROWS_AS(read_field(in), ParseError);
  }
  SUBCASE("non-finite value") {
    std::istringstream in("# pfsensor-field v1\n2 1 1\n1 1 1\n0 0 0\n0.5 0 0\nnan 0 0\n");
    try {
      read_field(in);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 6);
    }
  }
  SUBCASE("bad magic") {
    std::istringstream in("# field\n1 1 1\n1 1 1\n0 0 0\n0 0 0\n");
    CHECK_THROWS_AS(read_field(in), ParseError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_field("/nonexistent/field.txt"), ParseError); }
}

TEST_CASE("field files round-trip bitwise") {
  testing::Rng rng(testing::test_seed(21));
  for (int trial = 0; trial < 20; ++trial) {
    const StructuredGrid g({testing::uniform_size(rng, 1, 6), testing::uniform_size(rng, 1, 6),
                            testing::uniform_size(rng, 1, 3)},
                           {testing::uniform(rng, 0.01, 3), testing::uniform(rng, 0.01, 3), testing::uniform(rng, 0.01, 3)},
                           {testing::uniform(rng, -5, 5), 0.0, testing::uniform(rng, -1e-7, 1e-7)});
    std::vector<double> u(g.num_states()), v(g.num_states()), w(g.num_states());
    for (std::size_t k = 0; k < g.num_states(); ++k) {
      u[k] = testing::uniform(rng, -1, 1);
      v[k] = testing::uniform(rng, -1e-9, 1e-9);
      w[k] = testing::uniform(rng, -1e6, 1e6);
    }
    const VelocityField f(g, u, v, w);
    std::stringstream buf;
    write_field(buf, f);
    CHECK(read_field(buf) == f);
  }
}

TEST_CASE("scalar files round-trip") {
  const StructuredGrid g({3, 2, 1}, {0.5, 0.25, 1});
  const std::vector<double> values{0.0, 1.0 / 3.0, 2e-300, 7.0, 0.1, 1e10};
  std::stringstream buf;
  write_scalar_field(buf, g, values);
  const ScalarField s = read_scalar_field(buf);
  CHECK(s.grid == g);
  CHECK(s.values == values);
}

TEST_CASE("synth_recirculating scales linearly") {
  const StructuredGrid g({12, 9, 1}, {0.1, 0.2, 1});
  const VelocityField zero = synth_recirculating(g, 0.0);
  for (std::size_t k = 0; k < g.num_states(); ++k) {
    CHECK(zero.u()[k] == 0.0);
    CHECK(zero.v()[k] == 0.0);
  }
  const VelocityField a = synth_recirculating(g, 0.37);
  const VelocityField b = synth_recirculating(g, -0.37);
  const VelocityField one = synth_recirculating(g, 1.0);
  for (std::size_t k = 0; k < g.num_states(); ++k) {
    CHECK(b.u()[k] == -a.u()[k]);
    CHECK(b.v()[k] == -a.v()[k]);
    CHECK(a.u()[k] == doctest::Approx(0.37 * one.u()[k]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(synth_recirculating(StructuredGrid({4, 4, 2}, {1, 1, 1}), 1.0), std::invalid_argument);
}

TEST_CASE("discrete divergence of the vortex is second order") {
  // Equal cell counts per axis cancel the truncation error exactly, so the axes differ here.
  const double coarse =
      max_interior_divergence(synth_recirculating(StructuredGrid({20, 30, 1}, {0.05, 1.0 / 30, 1}), 1.0));
  const double fine =
      max_interior_divergence(synth_recirculating(StructuredGrid({40, 60, 1}, {0.025, 1.0 / 60, 1}), 1.0));
  CHECK(coarse < 1e-1);
  const double order = std::log2(coarse / fine);
  CHECK(order > 1.8);
  CHECK(order < 2.2);
}

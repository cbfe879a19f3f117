#include "pfsensor/transfer_operator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pfsensor/text_io.hpp"

namespace pfsensor {

namespace {

using Triplet = Eigen::Triplet<double, Eigen::Index>;

// Diagonal entries in [-kDiagonalSlack, 0) come from rounding at the admissible step and are
// clamped to zero; anything more negative is a stability violation.
constexpr double kDiagonalSlack = 1e-12;

struct Transfer {
  StateIndex to;
  double rate;  // volume per second leaving the donor cell towards `to`
};

// Outgoing transfer rates of cell k. The absorbing outlet state is `n` (the grid size).
void outgoing_rates(const FlowScenario& s, const BoundarySpec& boundary, StateIndex k,
                    std::vector<Transfer>& out) {
  out.clear();
  const StructuredGrid& grid = s.field.grid();
  const StateIndex n = grid.num_states();
  for (Face f : kAllFaces) {
    const int axis = face_axis(f);
    const double area = grid.face_area(axis);
    const double sign = face_sign(f);
    StateIndex nb = 0;
    if (grid.neighbor(k, f, nb)) {
      const double u_face = 0.5 * (s.field.component(axis, k) + s.field.component(axis, nb));
      const double advective = std::max(0.0, sign * u_face) * area;
      const double diffusive = s.diffusivity * area / grid.spacing()[axis];
      if (advective + diffusive > 0.0) out.push_back({nb, advective + diffusive});
    } else if (boundary.at(f) == BoundaryKind::kOutlet) {
      const double advective = std::max(0.0, sign * s.field.component(axis, k)) * area;
      if (advective > 0.0) out.push_back({n, advective});
    }
  }
}

}  // namespace

StabilityError::StabilityError(double requested_dt, double admissible)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "time step " << format_double(requested_dt)
            << " s violates the stability bound; maximum admissible dt = " << format_double(admissible)
            << " s";
        return msg.str();
      }()),
      requested_(requested_dt),
      admissible_(admissible) {}

bool BoundarySpec::has_outlet() const {
  return std::any_of(faces.begin(), faces.end(), [](BoundaryKind b) { return b == BoundaryKind::kOutlet; });
}

MarkovMatrix::MarkovMatrix(Storage entries, double dt) : entries_(std::move(entries)), dt_(dt) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("Markov time step must be positive");
  if (entries_.rows() != entries_.cols()) throw std::invalid_argument("Markov matrix must be square");
  entries_.makeCompressed();
  for (Eigen::Index r = 0; r < entries_.outerSize(); ++r) {
    double sum = 0.0;
    for (Storage::InnerIterator it(entries_, r); it; ++it) {
      if (!(it.value() >= 0.0 && it.value() <= 1.0)) {
        throw std::invalid_argument("Markov entry (" + std::to_string(r) + "," + std::to_string(it.col()) +
                                    ") outside [0, 1]");
      }
      sum += it.value();
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument("Markov row " + std::to_string(r) + " sums to " + format_double(sum));
    }
  }
}

MarkovMatrix MarkovMatrix::identity(std::size_t n, double dt) {
  Storage eye(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  eye.setIdentity();
  return MarkovMatrix(std::move(eye), dt);
}

double MarkovMatrix::coeff(StateIndex i, StateIndex j) const {
  return entries_.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

double MarkovMatrix::row_sum(StateIndex i) const {
  double sum = 0.0;
  for (Storage::InnerIterator it(entries_, static_cast<Eigen::Index>(i)); it; ++it) sum += it.value();
  return sum;
}

double admissible_dt(const FlowScenario& scenario, const BoundarySpec& boundary) {
  const StructuredGrid& grid = scenario.field.grid();
  double best = std::numeric_limits<double>::infinity();
  std::vector<Transfer> transfers;
  for (StateIndex k = 0; k < grid.num_states(); ++k) {
    outgoing_rates(scenario, boundary, k, transfers);
    double rate = 0.0;
    for (const Transfer& t : transfers) rate += t.rate;
    if (rate > 0.0) best = std::min(best, grid.cell_volume(k) / rate);
  }
  return best;
}

MarkovMatrix build_markov(const FlowScenario& scenario, double dt, const BoundarySpec& boundary) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("Markov time step must be positive");
  if (!(scenario.diffusivity >= 0.0)) throw std::invalid_argument("diffusivity must be non-negative");

  const StructuredGrid& grid = scenario.field.grid();
  const std::size_t n_grid = grid.num_states();
  const std::size_t n = boundary.has_outlet() ? n_grid + 1 : n_grid;

  std::vector<Triplet> triplets;
  triplets.reserve(n_grid * 7 + 1);
  std::vector<Transfer> transfers;
  bool unstable = false;
  for (StateIndex k = 0; k < n_grid; ++k) {
    outgoing_rates(scenario, boundary, k, transfers);
    const double volume = grid.cell_volume(k);
    double leaving = 0.0;
    for (const Transfer& t : transfers) {
      const double p = t.rate * dt / volume;
      leaving += p;
      triplets.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t.to), p);
    }
    double stay = 1.0 - leaving;
    if (stay < -kDiagonalSlack) {
      unstable = true;
      continue;
    }
    stay = std::max(stay, 0.0);
    if (stay > 0.0 || transfers.empty()) {
      triplets.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), stay);
    }
  }
  if (unstable) throw StabilityError(dt, admissible_dt(scenario, boundary));
  if (n > n_grid) triplets.emplace_back(static_cast<Eigen::Index>(n_grid), static_cast<Eigen::Index>(n_grid), 1.0);

  MarkovMatrix::Storage entries(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  entries.setFromTriplets(triplets.begin(), triplets.end());
  return MarkovMatrix(std::move(entries), dt);
}

ConcentrationField::ConcentrationField(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("concentration must be finite and non-negative");
  }
}

double ConcentrationField::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

SourceTerm::SourceTerm(std::vector<double> per_step) : values_(std::move(per_step)) {
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("source must be finite and non-negative");
  }
}

ConcentrationField propagate(const ConcentrationField& phi, const MarkovMatrix& p, const SourceTerm& source,
                             std::size_t steps) {
  if (phi.size() != p.n_states() || source.size() != p.n_states()) {
    throw std::invalid_argument("propagate: field, source and operator sizes differ");
  }
  if (steps == 0) return phi;

  const auto n = static_cast<Eigen::Index>(phi.size());
  Eigen::VectorXd current = Eigen::Map<const Eigen::VectorXd>(phi.values().data(), n);
  const Eigen::Map<const Eigen::VectorXd> s(source.values().data(), n);
  const bool has_source = (s.array() != 0.0).any();
  Eigen::VectorXd next(n);
  for (std::size_t step = 0; step < steps; ++step) {
    next.noalias() = p.entries().transpose() * current;
    if (has_source) next += s;
    current.swap(next);
  }
  // Rounding can leave -0.0 or tiny negative values where the field is exactly empty.
  std::vector<double> out(current.data(), current.data() + n);
  for (double& v : out) v = std::max(v, 0.0);
  return ConcentrationField(std::move(out));
}

MarkovMatrix expected_operator(std::span<const MarkovMatrix> operators, std::span<const double> weights) {
  if (operators.empty()) throw std::invalid_argument("expected_operator: no scenarios");
  if (operators.size() != weights.size()) throw std::invalid_argument("expected_operator: weight count mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("expected_operator: weight outside [0, 1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("expected_operator: weights do not sum to 1");

  const MarkovMatrix& first = operators.front();
  MarkovMatrix::Storage sum(first.entries().rows(), first.entries().cols());
  for (std::size_t s = 0; s < operators.size(); ++s) {
    const MarkovMatrix& op = operators[s];
    if (op.n_states() != first.n_states()) throw std::invalid_argument("expected_operator: size mismatch");
    if (op.dt() != first.dt()) throw std::invalid_argument("expected_operator: time step mismatch");
    sum += (weights[s] / total) * op.entries();
  }
  sum.prune(0.0);
  // A convex combination of ones can round one ulp above 1.
  for (Eigen::Index r = 0; r < sum.outerSize(); ++r) {
    for (MarkovMatrix::Storage::InnerIterator it(sum, r); it; ++it) it.valueRef() = std::min(it.value(), 1.0);
  }
  return MarkovMatrix(std::move(sum), first.dt());
}

MarkovMatrix read_markov(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  std::string line;
  if (!reader.next(line)) reader.fail("empty file");
  if (line != kMarkovMagic) reader.fail("expected header '" + std::string(kMarkovMagic) + "'");
  if (!reader.next(line)) reader.fail("missing size line");
  auto t = reader.tokens(line, 3);
  const std::size_t n = reader.to_size(t[0]);
  const std::size_t nnz = reader.to_size(t[1]);
  const double dt = reader.to_double(t[2]);
  if (n == 0) reader.fail("n_states must be positive");
  if (!(dt > 0.0)) reader.fail("dt must be positive");

  std::vector<Triplet> triplets;
  triplets.reserve(nnz);
  std::vector<double> row_sums(n, 0.0);
  for (std::size_t e = 0; e < nnz; ++e) {
    if (!reader.next(line)) reader.fail("expected " + std::to_string(nnz) + " entries, found " + std::to_string(e));
    t = reader.tokens(line, 3);
    const std::size_t row = reader.to_size(t[0]);
    const std::size_t col = reader.to_size(t[1]);
    const double value = reader.to_double(t[2]);
    if (row >= n || col >= n) reader.fail("entry index outside matrix");
    if (value < 0.0 || value > 1.0) reader.fail("entry value outside [0, 1]");
    row_sums[row] += value;
    triplets.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), value);
  }
  while (reader.next(line)) {
    if (line.find_first_not_of(" \t") != std::string::npos) reader.fail("unexpected extra entry");
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (std::abs(row_sums[r] - 1.0) > kRowSumTolerance) {
      throw ParseError(source, 0, "row " + std::to_string(r) + " sums to " + format_double(row_sums[r]) +
                                      ", not a row-stochastic matrix");
    }
  }
  MarkovMatrix::Storage entries(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  entries.setFromTriplets(triplets.begin(), triplets.end());
  try {
    return MarkovMatrix(std::move(entries), dt);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
}

MarkovMatrix load_markov(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open matrix file");
  return read_markov(in, path.string());
}

void write_markov(std::ostream& out, const MarkovMatrix& p) {
  out << kMarkovMagic << '\n' << p.n_states() << ' ' << p.nnz() << ' ' << format_double(p.dt()) << '\n';
  const auto& m = p.entries();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (MarkovMatrix::Storage::InnerIterator it(m, r); it; ++it) {
      out << r << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

void save_markov(const std::filesystem::path& path, const MarkovMatrix& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_markov(out, p);
}

}  // namespace pfsensor

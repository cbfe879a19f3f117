#include "pfsensor/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "pfsensor/text_io.hpp"

namespace pfsensor {

TrackingMatrix::TrackingMatrix(Storage entries, std::size_t horizon_steps, double dt)
    : entries_(std::move(entries)), steps_(horizon_steps), dt_(dt) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("tracking time step must be positive");
  if (entries_.rows() != entries_.cols()) throw std::invalid_argument("tracking matrix must be square");
  entries_.makeCompressed();
}

double TrackingMatrix::coeff(StateIndex i, StateIndex j) const {
  return entries_.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

TrackingMatrix tracking_matrix(const MarkovMatrix& p, std::size_t steps) {
  const auto n = static_cast<Eigen::Index>(p.n_states());
  const MarkovMatrix::Storage& a = p.entries();

  // Row i of Q is e_i (I + P + ... + P^m). Rows are advanced kBlock at a time, stored
  // interleaved so one pass over P serves the whole block.
  constexpr Eigen::Index kBlock = 8;
  std::vector<double> x(n * kBlock, 0.0), next(n * kBlock, 0.0), acc(n * kBlock, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<Eigen::Index> active, touched;

  TrackingMatrix::Storage q(n, n);
  q.reserve(a.nonZeros());
  for (Eigen::Index first = 0; first < n; first += kBlock) {
    const Eigen::Index rows = std::min(kBlock, n - first);
    active.clear();
    for (Eigen::Index b = 0; b < rows; ++b) {
      active.push_back(first + b);
      seen[first + b] = 1;
      x[(first + b) * kBlock + b] = 1.0;
      acc[(first + b) * kBlock + b] = 1.0;
    }
    for (std::size_t s = 0; s < steps; ++s) {
      touched.clear();
      for (Eigen::Index k : active) {
        const double* xk = &x[k * kBlock];
        for (MarkovMatrix::Storage::InnerIterator it(a, k); it; ++it) {
          const Eigen::Index j = it.col();
          if (!seen[j]) {
            seen[j] = 1;
            touched.push_back(j);
          }
          double* nj = &next[j * kBlock];
          const double v = it.value();
          for (Eigen::Index b = 0; b < kBlock; ++b) nj[b] += xk[b] * v;
        }
      }
      active.insert(active.end(), touched.begin(), touched.end());
      for (Eigen::Index k : active) {
        for (Eigen::Index b = 0; b < kBlock; ++b) {
          x[k * kBlock + b] = next[k * kBlock + b];
          next[k * kBlock + b] = 0.0;
          acc[k * kBlock + b] += x[k * kBlock + b];
        }
      }
    }
    std::sort(active.begin(), active.end());
    for (Eigen::Index b = 0; b < rows; ++b) {
      q.startVec(first + b);
      for (Eigen::Index j : active) {
        if (acc[j * kBlock + b] != 0.0) q.insertBack(first + b, j) = acc[j * kBlock + b];
      }
    }
    for (Eigen::Index j : active) {
      for (Eigen::Index b = 0; b < kBlock; ++b) x[j * kBlock + b] = acc[j * kBlock + b] = 0.0;
      seen[j] = 0;
    }
  }
  q.finalize();
  return TrackingMatrix(std::move(q), steps, p.dt());
}

SensorSpec::SensorSpec(double eps_acc, ThresholdMode m) : epsilon_acc(eps_acc), mode(m) {
  if (!(eps_acc >= 0.0 && eps_acc <= 1.0)) throw std::invalid_argument("eps_acc must lie in [0, 1]");
}

BinaryTrackingMatrix::BinaryTrackingMatrix(std::size_t n_states) : rows_(n_states) {
  if (n_states > std::numeric_limits<Index>::max()) throw std::invalid_argument("too many states");
}

BinaryTrackingMatrix BinaryTrackingMatrix::from_pairs(
    std::size_t n_states, const std::vector<std::pair<StateIndex, StateIndex>>& pairs) {
  BinaryTrackingMatrix out(n_states);
  for (const auto& [i, j] : pairs) {
    if (i >= n_states || j >= n_states) throw std::out_of_range("pair outside matrix");
    out.rows_[i].push_back(static_cast<Index>(j));
  }
  for (auto& r : out.rows_) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return out;
}

std::size_t BinaryTrackingMatrix::nnz() const {
  std::size_t total = 0;
  for (const auto& r : rows_) total += r.size();
  return total;
}

bool BinaryTrackingMatrix::contains(StateIndex row, StateIndex col) const {
  if (row >= rows_.size()) return false;
  return std::binary_search(rows_[row].begin(), rows_[row].end(), static_cast<Index>(col));
}

std::vector<std::pair<StateIndex, StateIndex>> BinaryTrackingMatrix::pairs() const {
  std::vector<std::pair<StateIndex, StateIndex>> out;
  out.reserve(nnz());
  for (StateIndex i = 0; i < rows_.size(); ++i) {
    for (Index j : rows_[i]) out.emplace_back(i, j);
  }
  return out;
}

BinaryTrackingMatrix threshold(const TrackingMatrix& q, const SensorSpec& spec) {
  const double cutoff = spec.mode == ThresholdMode::kRaw
                            ? spec.epsilon_acc
                            : spec.epsilon_acc * static_cast<double>(q.horizon_steps() + 1);
  BinaryTrackingMatrix out(q.n_states());
  const auto& m = q.entries();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    auto& row = out.rows_[static_cast<std::size_t>(r)];
    // Row-major inner indices are already sorted.
    for (TrackingMatrix::Storage::InnerIterator it(m, r); it; ++it) {
      if (it.value() >= cutoff) row.push_back(static_cast<BinaryTrackingMatrix::Index>(it.col()));
    }
  }
  return out;
}

BinaryTrackingMatrix apply_constraints(const BinaryTrackingMatrix& qb, const ConstraintSet& c) {
  if (c.forbidden_locations.num_states() != c.sensing_ignore.num_states()) {
    throw std::invalid_argument("constraint masks refer to different grids");
  }
  const std::size_t n_grid = c.forbidden_locations.num_states();
  if (qb.n_states() < n_grid) throw std::invalid_argument("constraint masks larger than tracking matrix");

  BinaryTrackingMatrix out(qb.n_states());
  for (StateIndex i = 0; i < std::min(qb.n_states(), n_grid); ++i) {
    if (c.sensing_ignore.contains(i)) continue;
    auto& row = out.rows_[i];
    for (auto j : qb.row(i)) {
      if (j < n_grid && !c.forbidden_locations.contains(j)) row.push_back(j);
    }
  }
  return out;
}

ScaledTrackingMatrix::ScaledTrackingMatrix(BinaryTrackingMatrix pattern, std::vector<double> row_values)
    : pattern_(std::move(pattern)), row_values_(std::move(row_values)) {
  if (row_values_.size() != pattern_.n_states()) throw std::invalid_argument("row value count mismatch");
}

ScaledTrackingMatrix volumetric_scale(const BinaryTrackingMatrix& qb, const StructuredGrid& grid) {
  const std::size_t n_grid = grid.num_states();
  if (qb.n_states() != n_grid && qb.n_states() != n_grid + 1) {
    throw std::invalid_argument("tracking matrix does not match grid state count");
  }
  std::vector<std::pair<StateIndex, StateIndex>> kept;
  for (const auto& [i, j] : qb.pairs()) {
    if (i < n_grid && j < n_grid) kept.emplace_back(i, j);
  }
  const double total = grid.total_volume();
  std::vector<double> values(qb.n_states(), 0.0);
  for (StateIndex i = 0; i < n_grid; ++i) values[i] = grid.cell_volume(i) / total;
  return ScaledTrackingMatrix(BinaryTrackingMatrix::from_pairs(qb.n_states(), kept), std::move(values));
}

void write_tracking(std::ostream& out, const TrackingMatrix& q) {
  out << kTrackingMagic << '\n'
      << q.n_states() << ' ' << q.nnz() << ' ' << format_double(q.dt()) << ' ' << q.horizon_steps() << '\n';
  const auto& m = q.entries();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (TrackingMatrix::Storage::InnerIterator it(m, r); it; ++it) {
      out << r << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

TrackingMatrix read_tracking(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  std::string line;
  if (!reader.next(line) || line != kTrackingMagic) reader.fail("expected header '" + std::string(kTrackingMagic) + "'");
  if (!reader.next(line)) reader.fail("missing size line");
  auto t = reader.tokens(line, 4);
  const std::size_t n = reader.to_size(t[0]);
  const std::size_t nnz = reader.to_size(t[1]);
  const double dt = reader.to_double(t[2]);
  const std::size_t steps = reader.to_size(t[3]);
  if (!(dt > 0.0)) reader.fail("dt must be positive");
  std::vector<Eigen::Triplet<double, Eigen::Index>> triplets;
  triplets.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    if (!reader.next(line)) reader.fail("expected " + std::to_string(nnz) + " entries, found " + std::to_string(e));
    t = reader.tokens(line, 3);
    const std::size_t row = reader.to_size(t[0]);
    const std::size_t col = reader.to_size(t[1]);
    const double value = reader.to_double(t[2]);
    if (row >= n || col >= n) reader.fail("entry index outside matrix");
    if (value < 0.0 || value > static_cast<double>(steps + 1)) reader.fail("entry outside [0, m + 1]");
    triplets.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), value);
  }
  TrackingMatrix::Storage q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  q.setFromTriplets(triplets.begin(), triplets.end());
  return TrackingMatrix(std::move(q), steps, dt);
}

void write_binary_tracking(std::ostream& out, const BinaryTrackingMatrix& qb) {
  out << kBinaryTrackingMagic << '\n' << qb.n_states() << ' ' << qb.nnz() << '\n';
  for (const auto& [i, j] : qb.pairs()) out << i << ' ' << j << '\n';
}

BinaryTrackingMatrix read_binary_tracking(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  std::string line;
  if (!reader.next(line) || line != kBinaryTrackingMagic) {
    reader.fail("expected header '" + std::string(kBinaryTrackingMagic) + "'");
  }
  if (!reader.next(line)) reader.fail("missing size line");
  auto t = reader.tokens(line, 2);
  const std::size_t n = reader.to_size(t[0]);
  const std::size_t count = reader.to_size(t[1]);
  std::vector<std::pair<StateIndex, StateIndex>> pairs;
  pairs.reserve(count);
  for (std::size_t e = 0; e < count; ++e) {
    if (!reader.next(line)) reader.fail("expected " + std::to_string(count) + " pairs, found " + std::to_string(e));
    t = reader.tokens(line, 2);
    const std::size_t row = reader.to_size(t[0]);
    const std::size_t col = reader.to_size(t[1]);
    if (row >= n || col >= n) reader.fail("pair index outside matrix");
    pairs.emplace_back(row, col);
  }
  return BinaryTrackingMatrix::from_pairs(n, pairs);
}

}  // namespace pfsensor

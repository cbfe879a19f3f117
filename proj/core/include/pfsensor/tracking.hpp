#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pfsensor/grid.hpp"
#include "pfsensor/transfer_operator.hpp"

namespace pfsensor {

/// Q = I + P + P^2 + ... + P^m. Entry (i, j) accumulates how much of a unit release per step
/// at state i has been seen at state j over the horizon m * dt.
class TrackingMatrix {
 public:
  using Storage = MarkovMatrix::Storage;

  TrackingMatrix(Storage entries, std::size_t horizon_steps, double dt);

  std::size_t n_states() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t nnz() const { return static_cast<std::size_t>(entries_.nonZeros()); }
  std::size_t horizon_steps() const { return steps_; }
  double dt() const { return dt_; }
  double horizon() const { return static_cast<double>(steps_) * dt_; }
  const Storage& entries() const { return entries_; }
  double coeff(StateIndex i, StateIndex j) const;

 private:
  Storage entries_;
  std::size_t steps_;
  double dt_;
};

/// Iterated multiply-accumulate, row by row: r <- e_i, q <- e_i, then m times { r <- r P; q <- q + r }.
TrackingMatrix tracking_matrix(const MarkovMatrix& p, std::size_t steps);

enum class ThresholdMode {
  /// Compare Q against eps_acc * (m + 1), keeping eps_acc a fraction of the released mass.
  kNormalized,
  /// Compare Q against eps_acc directly.
  kRaw,
};

/// Sensor detection threshold, detected over released mass, in [0, 1].
struct SensorSpec {
  explicit SensorSpec(double eps_acc, ThresholdMode mode = ThresholdMode::kNormalized);

  double epsilon_acc;
  ThresholdMode mode;
};

struct ConstraintSet;

/// Sparse set of (release row, sensor column) pairs, one sorted column list per row.
class BinaryTrackingMatrix {
 public:
  using Index = std::uint32_t;

  explicit BinaryTrackingMatrix(std::size_t n_states);
  /// Pairs may come in any order; duplicates are merged.
  static BinaryTrackingMatrix from_pairs(std::size_t n_states,
                                         const std::vector<std::pair<StateIndex, StateIndex>>& pairs);

  std::size_t n_states() const { return rows_.size(); }
  std::size_t nnz() const;
  bool contains(StateIndex row, StateIndex col) const;
  const std::vector<Index>& row(StateIndex i) const { return rows_[i]; }
  std::vector<std::pair<StateIndex, StateIndex>> pairs() const;

  friend bool operator==(const BinaryTrackingMatrix&, const BinaryTrackingMatrix&) = default;

 private:
  friend BinaryTrackingMatrix threshold(const TrackingMatrix&, const SensorSpec&);
  friend BinaryTrackingMatrix apply_constraints(const BinaryTrackingMatrix&, const ConstraintSet&);

  std::vector<std::vector<Index>> rows_;
};

/// Pair (i, j) present iff the stored Q(i, j) reaches the threshold (see ThresholdMode).
BinaryTrackingMatrix threshold(const TrackingMatrix& q, const SensorSpec& spec);

/// Location constraint (no sensor in `forbidden_locations`) and sensing constraint (releases in
/// `sensing_ignore` are not counted). States beyond the masks' grid, such as an absorbing outlet
/// state, are dropped on both axes.
struct ConstraintSet {
  ZoneMask forbidden_locations;
  ZoneMask sensing_ignore;

  static ConstraintSet none(const StructuredGrid& grid) { return {ZoneMask(grid), ZoneMask(grid)}; }
};

BinaryTrackingMatrix apply_constraints(const BinaryTrackingMatrix& qb, const ConstraintSet& c);

/// Volume-weighted binary matrix: every present pair in row i has value V_i / V_total.
class ScaledTrackingMatrix {
 public:
  ScaledTrackingMatrix(BinaryTrackingMatrix pattern, std::vector<double> row_values);

  std::size_t n_states() const { return pattern_.n_states(); }
  std::size_t nnz() const { return pattern_.nnz(); }
  const BinaryTrackingMatrix& pattern() const { return pattern_; }
  const std::vector<BinaryTrackingMatrix::Index>& row(StateIndex i) const { return pattern_.row(i); }
  double row_value(StateIndex i) const { return row_values_[i]; }
  double coeff(StateIndex i, StateIndex j) const { return pattern_.contains(i, j) ? row_values_[i] : 0.0; }

 private:
  BinaryTrackingMatrix pattern_;
  std::vector<double> row_values_;
};

/// Rows at or beyond grid.num_states() are dropped.
ScaledTrackingMatrix volumetric_scale(const BinaryTrackingMatrix& qb, const StructuredGrid& grid);

// Tracking files: "# pfsensor-tracking v1", "n_states nnz dt m", then "row col value" lines.
// Binary files: "# pfsensor-tracking-binary v1", "n_states npairs", then "row col" lines.
inline constexpr const char* kTrackingMagic = "# pfsensor-tracking v1";
inline constexpr const char* kBinaryTrackingMagic = "# pfsensor-tracking-binary v1";

void write_tracking(std::ostream& out, const TrackingMatrix& q);
TrackingMatrix read_tracking(std::istream& in, const std::string& source = "<stream>");
void write_binary_tracking(std::ostream& out, const BinaryTrackingMatrix& qb);
BinaryTrackingMatrix read_binary_tracking(std::istream& in, const std::string& source = "<stream>");

}  // namespace pfsensor

#pragma once

#include <Eigen/SparseCore>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfsensor/flowfield.hpp"
#include "pfsensor/grid.hpp"

namespace pfsensor {

/// Tolerance on Markov row sums.
inline constexpr double kRowSumTolerance = 1e-12;

/// Raised when a time step exceeds the explicit stability bound.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(double requested_dt, double admissible_dt);
  double requested_dt() const { return requested_; }
  /// Largest step for which every diagonal entry stays non-negative.
  double admissible_dt() const { return admissible_; }

 private:
  double requested_;
  double admissible_;
};

/// Treatment of the six outer faces of the grid.
enum class BoundaryKind { kClosed, kOutlet };

/// Indexed by Face. Outlet faces route outgoing advective flux to an extra absorbing state N.
struct BoundarySpec {
  std::array<BoundaryKind, 6> faces{BoundaryKind::kClosed, BoundaryKind::kClosed,
                                    BoundaryKind::kClosed, BoundaryKind::kClosed,
                                    BoundaryKind::kClosed, BoundaryKind::kClosed};

  BoundaryKind at(Face f) const { return faces[static_cast<int>(f)]; }
  bool has_outlet() const;
};

/// Row-stochastic sparse transfer matrix: entry (i, j) is the probability that mass in
/// state i moves to state j during one step of length dt. Immutable once built.
class MarkovMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  /// Validates entries in [0, 1], row sums within kRowSumTolerance and dt > 0.
  /// Throws std::invalid_argument otherwise.
  MarkovMatrix(Storage entries, double dt);

  static MarkovMatrix identity(std::size_t n, double dt);

  std::size_t n_states() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t nnz() const { return static_cast<std::size_t>(entries_.nonZeros()); }
  double dt() const { return dt_; }
  const Storage& entries() const { return entries_; }
  double coeff(StateIndex i, StateIndex j) const;
  double row_sum(StateIndex i) const;

 private:
  Storage entries_;
  double dt_;
};

/// Largest dt for which the donor-cell operator of `scenario` stays non-negative:
/// min over cells of V_i / (total outgoing transfer rate). +inf when nothing moves.
double admissible_dt(const FlowScenario& scenario, const BoundarySpec& boundary = {});

/// Flux-based construction of the transfer operator: for every cell i and face neighbor j,
/// advective transfer max(0, u_face . n) A dt (face velocity = two-point mean of the cell
/// values) plus diffusive transfer D A dt / d_ij, divided by V_i; the diagonal keeps the
/// remainder. Throws StabilityError if a diagonal would go negative, std::invalid_argument
/// for dt <= 0.
MarkovMatrix build_markov(const FlowScenario& scenario, double dt, const BoundarySpec& boundary = {});

/// Per-state contaminant amount. Values are finite and non-negative.
class ConcentrationField {
 public:
  explicit ConcentrationField(std::vector<double> values);
  static ConcentrationField zeros(std::size_t n) { return ConcentrationField(std::vector<double>(n, 0.0)); }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double total() const;

 private:
  std::vector<double> values_;
};

/// Amount released into each state every step.
class SourceTerm {
 public:
  explicit SourceTerm(std::vector<double> per_step);
  static SourceTerm none(std::size_t n) { return SourceTerm(std::vector<double>(n, 0.0)); }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Applies phi <- phi P + source `steps` times (phi as a row vector).
ConcentrationField propagate(const ConcentrationField& phi, const MarkovMatrix& p,
                             const SourceTerm& source, std::size_t steps);

/// Probability-weighted sum of per-scenario operators. Requires equal sizes and dt and weights
/// summing to one within 1e-9; weights are renormalized so the result stays row-stochastic.
MarkovMatrix expected_operator(std::span<const MarkovMatrix> operators, std::span<const double> weights);

// Matrix files: "# pfsensor-markov v1", "n_states nnz dt", then nnz "row col value" lines.
inline constexpr const char* kMarkovMagic = "# pfsensor-markov v1";

MarkovMatrix read_markov(std::istream& in, const std::string& source = "<stream>");
/// Throws ParseError for malformed files, including row-sum violations.
MarkovMatrix load_markov(const std::filesystem::path& path);
void write_markov(std::ostream& out, const MarkovMatrix& p);
void save_markov(const std::filesystem::path& path, const MarkovMatrix& p);

}  // namespace pfsensor

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pfsensor/flowfield.hpp"
#include "pfsensor/transfer_operator.hpp"

namespace pfsensor {

/// Explicit finite-volume reference solver for dphi/dt + div(U phi) = div(D grad phi) + S
/// with first-order upwind advection and central diffusion.
struct OracleConfig {
  /// Fraction of the stability limit used for the step, in (0, 0.5].
  double cfl_target = 0.5;
  /// Integration horizon in seconds, > 0.
  double end_time = 1.0;
  /// Fixed step overriding cfl_target. Must not exceed the stability limit and must divide
  /// end_time into a whole number of steps (within 1e-9 relative).
  std::optional<double> step;

  void validate() const;
};

/// Integrates `phi0` (amount per cell) to cfg.end_time. `source_per_second` is the amount released
/// per second into each cell. Boundaries follow `boundary` (closed by default); with outlets the
/// field carries one extra absorbing entry, as in build_markov.
/// Throws StabilityError when a fixed step exceeds the admissible step.
ConcentrationField solve_pde(const FlowScenario& scenario, const ConcentrationField& phi0,
                             const std::vector<double>& source_per_second, const OracleConfig& cfg,
                             const BoundarySpec& boundary = {});

/// Step count and step size the solver would use for `cfg`.
struct OracleSchedule {
  std::size_t steps;
  double step;
  double admissible_step;
};
OracleSchedule oracle_schedule(const FlowScenario& scenario, const OracleConfig& cfg,
                               const BoundarySpec& boundary = {});

struct TransportComparison {
  /// ||phi_markov - phi_pde||_2 / ||phi_pde||_2 (absolute norm when the PDE field is zero).
  double l2_relative_error;
  ConcentrationField markov;
  ConcentrationField pde;
};

/// Propagates phi0 for m Markov steps of length dt with zero source, and integrates the PDE to
/// m * dt with `oracle` (its end_time is overwritten), then compares the two fields.
TransportComparison compare_transport(const FlowScenario& scenario, const ConcentrationField& phi0,
                                      std::size_t m, double dt, OracleConfig oracle = {},
                                      const BoundarySpec& boundary = {});

/// Same comparison against a prebuilt operator (for example one loaded from disk).
TransportComparison compare_transport(const FlowScenario& scenario, const MarkovMatrix& p,
                                      const ConcentrationField& phi0, std::size_t m, OracleConfig oracle = {},
                                      const BoundarySpec& boundary = {});

}  // namespace pfsensor

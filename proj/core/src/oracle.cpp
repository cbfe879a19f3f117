#include "pfsensor/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pfsensor {

namespace {

// Net flux through one face, oriented from `from` to `to`. `rate_from` and `rate_to` are the
// upwind volumetric rates (m^3/s) for mass leaving each side; `conductance` is D A / d.
struct FaceLink {
  StateIndex from;
  StateIndex to;
  double rate_from;
  double rate_to;
  double conductance;
};

struct OutletLink {
  StateIndex cell;
  double rate;
};

struct Stencil {
  std::vector<FaceLink> faces;
  std::vector<OutletLink> outlets;
  std::vector<double> volume;
  double admissible_step = std::numeric_limits<double>::infinity();
};

Stencil make_stencil(const FlowScenario& s, const BoundarySpec& boundary) {
  const StructuredGrid& g = s.field.grid();
  const std::size_t n = g.num_states();
  Stencil st;
  st.volume.resize(n);
  std::vector<double> out_rate(n, 0.0);
  for (StateIndex k = 0; k < n; ++k) st.volume[k] = g.cell_volume(k);

  for (StateIndex l = 0; l < g.nz(); ++l) {
    for (StateIndex j = 0; j < g.ny(); ++j) {
      for (StateIndex i = 0; i < g.nx(); ++i) {
        const std::array<StateIndex, 3> idx{i, j, l};
        const StateIndex k = g.state_index({i, j, l});
        for (int axis = 0; axis < 3; ++axis) {
          const double area = g.face_area(axis);
          // Faces on the positive side; the low boundary face is handled when idx is 0.
          if (idx[axis] + 1 < g.dims()[axis]) {
            std::array<StateIndex, 3> up = idx;
            ++up[axis];
            const StateIndex kn = g.state_index({up[0], up[1], up[2]});
            const double u_face = 0.5 * (s.field.component(axis, k) + s.field.component(axis, kn));
            FaceLink link{k, kn, std::max(0.0, u_face) * area, std::max(0.0, -u_face) * area,
                          s.diffusivity * area / g.spacing()[axis]};
            out_rate[k] += link.rate_from + link.conductance;
            out_rate[kn] += link.rate_to + link.conductance;
            st.faces.push_back(link);
          } else if (boundary.faces[2 * axis + 1] == BoundaryKind::kOutlet) {
            const double rate = std::max(0.0, s.field.component(axis, k)) * area;
            out_rate[k] += rate;
            if (rate > 0.0) st.outlets.push_back({k, rate});
          }
          if (idx[axis] == 0 && boundary.faces[2 * axis] == BoundaryKind::kOutlet) {
            const double rate = std::max(0.0, -s.field.component(axis, k)) * area;
            out_rate[k] += rate;
            if (rate > 0.0) st.outlets.push_back({k, rate});
          }
        }
      }
    }
  }
  for (StateIndex k = 0; k < n; ++k) {
    if (out_rate[k] > 0.0) st.admissible_step = std::min(st.admissible_step, st.volume[k] / out_rate[k]);
  }
  return st;
}

OracleSchedule schedule_for(const Stencil& st, const OracleConfig& cfg) {
  cfg.validate();
  if (cfg.step) {
    const double h = *cfg.step;
    if (h > st.admissible_step) throw StabilityError(h, st.admissible_step);
    const double ratio = cfg.end_time / h;
    const double steps = std::round(ratio);
    if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * ratio) {
      throw std::invalid_argument("oracle step must divide end_time into whole steps");
    }
    return {static_cast<std::size_t>(steps), h, st.admissible_step};
  }
  if (!std::isfinite(st.admissible_step)) return {1, cfg.end_time, st.admissible_step};
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.end_time / (cfg.cfl_target * st.admissible_step)));
  return {std::max<std::size_t>(steps, 1), cfg.end_time / static_cast<double>(std::max<std::size_t>(steps, 1)),
          st.admissible_step};
}

double l2_norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

void OracleConfig::validate() const {
  if (!(cfl_target > 0.0 && cfl_target <= 0.5)) throw std::invalid_argument("cfl_target must lie in (0, 0.5]");
  if (!(end_time > 0.0) || !std::isfinite(end_time)) throw std::invalid_argument("end_time must be positive");
  if (step && !(*step > 0.0)) throw std::invalid_argument("oracle step must be positive");
}

OracleSchedule oracle_schedule(const FlowScenario& scenario, const OracleConfig& cfg, const BoundarySpec& boundary) {
  return schedule_for(make_stencil(scenario, boundary), cfg);
}

ConcentrationField solve_pde(const FlowScenario& scenario, const ConcentrationField& phi0,
                             const std::vector<double>& source_per_second, const OracleConfig& cfg,
                             const BoundarySpec& boundary) {
  const std::size_t n = scenario.field.grid().num_states();
  const std::size_t total = boundary.has_outlet() ? n + 1 : n;
  if (phi0.size() != total) throw std::invalid_argument("solve_pde: initial field size mismatch");
  if (!source_per_second.empty() && source_per_second.size() != total) {
    throw std::invalid_argument("solve_pde: source size mismatch");
  }

  const Stencil st = make_stencil(scenario, boundary);
  const OracleSchedule sched = schedule_for(st, cfg);
  const double h = sched.step;

  std::vector<double> mass = phi0.values();
  std::vector<double> conc(n);
  for (std::size_t step = 0; step < sched.steps; ++step) {
    for (StateIndex k = 0; k < n; ++k) conc[k] = mass[k] / st.volume[k];
    std::vector<double> next = mass;
    for (const FaceLink& f : st.faces) {
      const double advective = f.rate_from * conc[f.from] - f.rate_to * conc[f.to];
      const double diffusive = f.conductance * (conc[f.from] - conc[f.to]);
      const double moved = (advective + diffusive) * h;
      next[f.from] -= moved;
      next[f.to] += moved;
    }
    for (const OutletLink& o : st.outlets) {
      const double moved = o.rate * conc[o.cell] * h;
      next[o.cell] -= moved;
      next[n] += moved;
    }
    if (!source_per_second.empty()) {
      for (std::size_t k = 0; k < total; ++k) next[k] += source_per_second[k] * h;
    }
    mass.swap(next);
  }
  for (double& v : mass) v = std::max(v, 0.0);
  return ConcentrationField(std::move(mass));
}

TransportComparison compare_transport(const FlowScenario& scenario, const MarkovMatrix& p,
                                      const ConcentrationField& phi0, std::size_t m, OracleConfig oracle,
                                      const BoundarySpec& boundary) {
  if (m == 0) return {0.0, phi0, phi0};
  oracle.end_time = static_cast<double>(m) * p.dt();
  ConcentrationField markov = propagate(phi0, p, SourceTerm::none(phi0.size()), m);
  ConcentrationField pde = solve_pde(scenario, phi0, {}, oracle, boundary);

  std::vector<double> diff(markov.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = markov.values()[k] - pde.values()[k];
  const double ref = l2_norm(pde.values());
  const double err = ref > 0.0 ? l2_norm(diff) / ref : l2_norm(diff);
  return {err, std::move(markov), std::move(pde)};
}

TransportComparison compare_transport(const FlowScenario& scenario, const ConcentrationField& phi0, std::size_t m,
                                      double dt, OracleConfig oracle, const BoundarySpec& boundary) {
  const MarkovMatrix p = build_markov(scenario, dt, boundary);
  return compare_transport(scenario, p, phi0, m, oracle, boundary);
}

}  // namespace pfsensor

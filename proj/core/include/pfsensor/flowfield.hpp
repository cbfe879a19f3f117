#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pfsensor/grid.hpp"

namespace pfsensor {

/// Cell-centered velocity (m/s) on a structured grid.
class VelocityField {
 public:
  /// Zero field.
  explicit VelocityField(StructuredGrid grid);
  /// Throws std::invalid_argument on length mismatch or non-finite values.
  VelocityField(StructuredGrid grid, std::vector<double> u, std::vector<double> v,
                std::vector<double> w);

  const StructuredGrid& grid() const { return grid_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }
  const std::vector<double>& w() const { return w_; }

  /// Velocity component along `axis` at state k.
  double component(int axis, StateIndex k) const;

  friend bool operator==(const VelocityField&, const VelocityField&) = default;

 private:
  StructuredGrid grid_;
  std::vector<double> u_, v_, w_;
};

/// One flow realization: velocity, diffusivity D (m^2/s), sample value xi and weight theta.
struct FlowScenario {
  FlowScenario(VelocityField field, double diffusivity, double sample_value = 0.0,
               double weight = 1.0);

  VelocityField field;
  double diffusivity;
  double sample_value;
  double weight;
};

// Field files: "# pfsensor-field v1", "nx ny nz", "dx dy dz", "x0 y0 z0", then
// one "u v w" record per state in state-index order.
inline constexpr const char* kFieldMagic = "# pfsensor-field v1";
// Scalar files share the header layout with a single value per record.
inline constexpr const char* kScalarMagic = "# pfsensor-scalar v1";

VelocityField read_field(std::istream& in, const std::string& source = "<stream>");
/// Throws ParseError (with line number) on malformed content or an unreadable file.
VelocityField load_field(const std::filesystem::path& path);
void write_field(std::ostream& out, const VelocityField& field);
void save_field(const std::filesystem::path& path, const VelocityField& field);

/// Per-state scalar values (concentration, coverage maps) on a grid.
struct ScalarField {
  StructuredGrid grid;
  std::vector<double> values;
};

ScalarField read_scalar_field(std::istream& in, const std::string& source = "<stream>");
ScalarField load_scalar_field(const std::filesystem::path& path);
void write_scalar_field(std::ostream& out, const StructuredGrid& grid,
                        const std::vector<double>& values);
void save_scalar_field(const std::filesystem::path& path, const StructuredGrid& grid,
                       const std::vector<double>& values);

/// Single-vortex stream-function flow psi = sin(pi x/Lx) sin(pi y/Ly) scaled by `strength`:
/// u = strength * dpsi/dy, v = -strength * dpsi/dx, sampled at cell centers (x, y relative
/// to the grid origin). Divergence free with zero normal velocity on the walls.
/// Throws std::invalid_argument for 3D grids or non-finite strength.
VelocityField synth_recirculating(const StructuredGrid& grid, double strength);

}  // namespace pfsensor

#include "pfsensor/flowfield.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "pfsensor/text_io.hpp"

namespace pfsensor {

namespace {

void check_finite(const std::vector<double>& xs, const char* name) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string("non-finite value in ") + name);
  }
}

StructuredGrid read_grid_header(LineReader& reader, const char* magic) {
  std::string line;
  if (!reader.next(line)) reader.fail("empty file");
  if (line != magic) reader.fail("expected header '" + std::string(magic) + "'");

  if (!reader.next(line)) reader.fail("missing grid dimensions");
  auto t = reader.tokens(line, 3);
  std::array<std::size_t, 3> dims{reader.to_size(t[0]), reader.to_size(t[1]), reader.to_size(t[2])};
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) reader.fail("grid dimensions must be positive");

  if (!reader.next(line)) reader.fail("missing grid spacing");
  t = reader.tokens(line, 3);
  Vec3 spacing{reader.to_double(t[0]), reader.to_double(t[1]), reader.to_double(t[2])};
  for (double s : spacing) {
    if (!(s > 0.0)) reader.fail("grid spacing must be positive");
  }

  if (!reader.next(line)) reader.fail("missing grid origin");
  t = reader.tokens(line, 3);
  Vec3 origin{reader.to_double(t[0]), reader.to_double(t[1]), reader.to_double(t[2])};
  return StructuredGrid(dims, spacing, origin);
}

void write_grid_header(std::ostream& out, const StructuredGrid& g, const char* magic) {
  out << magic << '\n'
      << g.nx() << ' ' << g.ny() << ' ' << g.nz() << '\n'
      << format_double(g.spacing()[0]) << ' ' << format_double(g.spacing()[1]) << ' '
      << format_double(g.spacing()[2]) << '\n'
      << format_double(g.origin()[0]) << ' ' << format_double(g.origin()[1]) << ' '
      << format_double(g.origin()[2]) << '\n';
}

void expect_end(LineReader& reader) {
  std::string line;
  while (reader.next(line)) {
    if (line.find_first_not_of(" \t") != std::string::npos) reader.fail("unexpected extra record");
  }
}

}  // namespace

VelocityField::VelocityField(StructuredGrid grid)
    : grid_(grid),
      u_(grid.num_states(), 0.0),
      v_(grid.num_states(), 0.0),
      w_(grid.num_states(), 0.0) {}

VelocityField::VelocityField(StructuredGrid grid, std::vector<double> u, std::vector<double> v,
                             std::vector<double> w)
    : grid_(grid), u_(std::move(u)), v_(std::move(v)), w_(std::move(w)) {
  const std::size_t n = grid_.num_states();
  if (u_.size() != n || v_.size() != n || w_.size() != n) {
    throw std::invalid_argument("velocity component length does not match grid");
  }
  check_finite(u_, "u");
  check_finite(v_, "v");
  check_finite(w_, "w");
}

double VelocityField::component(int axis, StateIndex k) const {
  switch (axis) {
    case 0: return u_[k];
    case 1: return v_[k];
    default: return w_[k];
  }
}

FlowScenario::FlowScenario(VelocityField f, double d, double xi, double theta)
    : field(std::move(f)), diffusivity(d), sample_value(xi), weight(theta) {
  if (!(diffusivity >= 0.0)) throw std::invalid_argument("diffusivity must be non-negative");
  if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("scenario weight must lie in [0, 1]");
}

VelocityField read_field(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  const StructuredGrid grid = read_grid_header(reader, kFieldMagic);
  const std::size_t n = grid.num_states();
  std::vector<double> u(n), v(n), w(n);
  std::string line;
  for (std::size_t k = 0; k < n; ++k) {
    if (!reader.next(line)) {
      reader.fail("expected " + std::to_string(n) + " velocity records, found " + std::to_string(k));
    }
    auto t = reader.tokens(line, 3);
    u[k] = reader.to_double(t[0]);
    v[k] = reader.to_double(t[1]);
    w[k] = reader.to_double(t[2]);
  }
  expect_end(reader);
  return VelocityField(grid, std::move(u), std::move(v), std::move(w));
}

VelocityField load_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open field file");
  return read_field(in, path.string());
}

void write_field(std::ostream& out, const VelocityField& field) {
  write_grid_header(out, field.grid(), kFieldMagic);
  for (std::size_t k = 0; k < field.grid().num_states(); ++k) {
    out << format_double(field.u()[k]) << ' ' << format_double(field.v()[k]) << ' '
        << format_double(field.w()[k]) << '\n';
  }
}

void save_field(const std::filesystem::path& path, const VelocityField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_field(out, field);
}

ScalarField read_scalar_field(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  ScalarField out{read_grid_header(reader, kScalarMagic), {}};
  const std::size_t n = out.grid.num_states();
  out.values.resize(n);
  std::string line;
  for (std::size_t k = 0; k < n; ++k) {
    if (!reader.next(line)) {
      reader.fail("expected " + std::to_string(n) + " records, found " + std::to_string(k));
    }
    out.values[k] = reader.to_double(reader.tokens(line, 1)[0]);
  }
  expect_end(reader);
  return out;
}

ScalarField load_scalar_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open scalar file");
  return read_scalar_field(in, path.string());
}

void write_scalar_field(std::ostream& out, const StructuredGrid& grid,
                        const std::vector<double>& values) {
  if (values.size() != grid.num_states()) throw std::invalid_argument("scalar field length mismatch");
  write_grid_header(out, grid, kScalarMagic);
  for (double v : values) out << format_double(v) << '\n';
}

void save_scalar_field(const std::filesystem::path& path, const StructuredGrid& grid,
                       const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_scalar_field(out, grid, values);
}

VelocityField synth_recirculating(const StructuredGrid& grid, double strength) {
  if (!grid.is_2d()) throw std::invalid_argument("recirculating flow requires a 2D grid (nz = 1)");
  if (!std::isfinite(strength)) throw std::invalid_argument("flow strength must be finite");

  using std::numbers::pi;
  const Vec3 len = grid.lengths();
  const std::size_t n = grid.num_states();
  std::vector<double> u(n), v(n), w(n, 0.0);
  for (StateIndex k = 0; k < n; ++k) {
    const Vec3 c = grid.cell_center(k);
    const double ax = pi * (c[0] - grid.origin()[0]) / len[0];
    const double ay = pi * (c[1] - grid.origin()[1]) / len[1];
    const double dpsi_dx = (pi / len[0]) * std::cos(ax) * std::sin(ay);
    const double dpsi_dy = (pi / len[1]) * std::sin(ax) * std::cos(ay);
    u[k] = strength * dpsi_dy;
    v[k] = -strength * dpsi_dx;
  }
  return VelocityField(grid, std::move(u), std::move(v), std::move(w));
}

}  // namespace pfsensor

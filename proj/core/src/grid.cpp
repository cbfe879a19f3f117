#include "pfsensor/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pfsensor {

StructuredGrid::StructuredGrid(std::array<std::size_t, 3> dims, Vec3 spacing, Vec3 origin)
    : dims_(dims), spacing_(spacing), origin_(origin) {
  for (int a = 0; a < 3; ++a) {
    if (dims_[a] == 0) throw std::invalid_argument("grid dimension must be positive");
    if (!(spacing_[a] > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  }
}

StateIndex StructuredGrid::state_index(const CellIndex& c) const {
  if (c.i >= dims_[0] || c.j >= dims_[1] || c.l >= dims_[2]) {
    throw std::out_of_range("cell (" + std::to_string(c.i) + "," + std::to_string(c.j) + "," +
                            std::to_string(c.l) + ") outside grid");
  }
  return c.i + dims_[0] * (c.j + dims_[1] * c.l);
}

CellIndex StructuredGrid::cell_index(StateIndex k) const {
  if (k >= num_states()) throw std::out_of_range("state " + std::to_string(k) + " outside grid");
  CellIndex c;
  c.i = k % dims_[0];
  k /= dims_[0];
  c.j = k % dims_[1];
  c.l = k / dims_[1];
  return c;
}

Vec3 StructuredGrid::cell_center(StateIndex k) const {
  const CellIndex c = cell_index(k);
  const std::array<std::size_t, 3> idx = {c.i, c.j, c.l};
  Vec3 x{};
  for (int a = 0; a < 3; ++a) x[a] = origin_[a] + (static_cast<double>(idx[a]) + 0.5) * spacing_[a];
  return x;
}

Vec3 StructuredGrid::lengths() const {
  return {static_cast<double>(dims_[0]) * spacing_[0], static_cast<double>(dims_[1]) * spacing_[1],
          static_cast<double>(dims_[2]) * spacing_[2]};
}

double StructuredGrid::total_volume() const {
  return static_cast<double>(num_states()) * cell_volume(0);
}

double StructuredGrid::face_area(int axis) const {
  switch (axis) {
    case 0: return spacing_[1] * spacing_[2];
    case 1: return spacing_[0] * spacing_[2];
    default: return spacing_[0] * spacing_[1];
  }
}

bool StructuredGrid::neighbor(StateIndex k, Face f, StateIndex& out) const {
  CellIndex c = cell_index(k);
  std::array<std::size_t, 3> idx = {c.i, c.j, c.l};
  const int a = face_axis(f);
  if (face_sign(f) < 0) {
    if (idx[a] == 0) return false;
    --idx[a];
  } else {
    if (idx[a] + 1 >= dims_[a]) return false;
    ++idx[a];
  }
  out = idx[0] + dims_[0] * (idx[1] + dims_[1] * idx[2]);
  return true;
}

ZoneMask::ZoneMask(const StructuredGrid& grid) : flags_(grid.num_states(), false) {}

ZoneMask::ZoneMask(const StructuredGrid& grid, std::vector<StateIndex> states)
    : flags_(grid.num_states(), false) {
  for (StateIndex k : states) {
    if (k >= flags_.size()) throw std::out_of_range("mask state " + std::to_string(k) + " outside grid");
    flags_[k] = true;
  }
  for (StateIndex k = 0; k < flags_.size(); ++k) {
    if (flags_[k]) members_.push_back(k);
  }
}

ZoneMask ZoneMask::all(const StructuredGrid& grid) { return ZoneMask(grid).complement(); }

ZoneMask ZoneMask::complement() const {
  ZoneMask out(*this);
  out.members_.clear();
  for (StateIndex k = 0; k < out.flags_.size(); ++k) {
    out.flags_[k] = !flags_[k];
    if (out.flags_[k]) out.members_.push_back(k);
  }
  return out;
}

ZoneMask ZoneMask::united(const ZoneMask& other) const {
  if (other.flags_.size() != flags_.size()) throw std::invalid_argument("mask grid mismatch");
  ZoneMask out(*this);
  out.members_.clear();
  for (StateIndex k = 0; k < out.flags_.size(); ++k) {
    out.flags_[k] = flags_[k] || other.flags_[k];
    if (out.flags_[k]) out.members_.push_back(k);
  }
  return out;
}

ZoneMask box_mask(const StructuredGrid& grid, const Vec3& lo, const Vec3& hi) {
  for (int a = 0; a < 3; ++a) {
    if (lo[a] > hi[a]) throw std::invalid_argument("box lower corner exceeds upper corner");
  }
  std::vector<StateIndex> inside;
  for (StateIndex k = 0; k < grid.num_states(); ++k) {
    const Vec3 x = grid.cell_center(k);
    bool in = true;
    for (int a = 0; a < 3 && in; ++a) in = x[a] >= lo[a] && x[a] <= hi[a];
    if (in) inside.push_back(k);
  }
  return ZoneMask(grid, std::move(inside));
}

}  // namespace pfsensor

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace pfsensor {

using StateIndex = std::size_t;

/// Cell coordinates (i, j, l) along x, y, z.
struct CellIndex {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t l = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

using Vec3 = std::array<double, 3>;

/// Axis-aligned face directions of a hexahedral cell.
enum class Face { kXMinus, kXPlus, kYMinus, kYPlus, kZMinus, kZPlus };

inline constexpr std::array<Face, 6> kAllFaces = {Face::kXMinus, Face::kXPlus, Face::kYMinus,
                                                  Face::kYPlus,  Face::kZMinus, Face::kZPlus};

/// Axis (0, 1, 2) normal to a face.
constexpr int face_axis(Face f) { return static_cast<int>(f) / 2; }
/// +1 for faces on the positive side of the cell, -1 otherwise.
constexpr int face_sign(Face f) { return static_cast<int>(f) % 2 == 0 ? -1 : 1; }

/// Uniform rectilinear, cell-centered grid. States are numbered
/// k = i + nx * (j + ny * l), x fastest. Immutable after construction.
class StructuredGrid {
 public:
  /// Throws std::invalid_argument for zero dims or non-positive spacing.
  StructuredGrid(std::array<std::size_t, 3> dims, Vec3 spacing, Vec3 origin = {0.0, 0.0, 0.0});

  const std::array<std::size_t, 3>& dims() const { return dims_; }
  std::size_t nx() const { return dims_[0]; }
  std::size_t ny() const { return dims_[1]; }
  std::size_t nz() const { return dims_[2]; }
  const Vec3& spacing() const { return spacing_; }
  const Vec3& origin() const { return origin_; }

  std::size_t num_states() const { return dims_[0] * dims_[1] * dims_[2]; }
  bool is_2d() const { return dims_[2] == 1; }

  /// Throws std::out_of_range when any coordinate is outside the grid.
  StateIndex state_index(const CellIndex& c) const;
  /// Throws std::out_of_range for k >= num_states().
  CellIndex cell_index(StateIndex k) const;

  Vec3 cell_center(StateIndex k) const;
  /// Domain extent along each axis.
  Vec3 lengths() const;

  double cell_volume(StateIndex /*k*/) const { return spacing_[0] * spacing_[1] * spacing_[2]; }
  double total_volume() const;
  /// Area of the face normal to `axis`.
  double face_area(int axis) const;

  /// Neighbor across `f`, or false when the face lies on the domain boundary.
  bool neighbor(StateIndex k, Face f, StateIndex& out) const;

  friend bool operator==(const StructuredGrid&, const StructuredGrid&) = default;

 private:
  std::array<std::size_t, 3> dims_;
  Vec3 spacing_;
  Vec3 origin_;
};

/// A subset of grid states, kept sorted and unique.
class ZoneMask {
 public:
  explicit ZoneMask(const StructuredGrid& grid);
  /// Throws std::out_of_range if any state is outside the grid.
  ZoneMask(const StructuredGrid& grid, std::vector<StateIndex> states);

  static ZoneMask all(const StructuredGrid& grid);

  std::size_t num_states() const { return flags_.size(); }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(StateIndex k) const { return k < flags_.size() && flags_[k]; }
  const std::vector<StateIndex>& members() const { return members_; }

  ZoneMask complement() const;
  ZoneMask united(const ZoneMask& other) const;

  friend bool operator==(const ZoneMask& a, const ZoneMask& b) { return a.flags_ == b.flags_; }

 private:
  std::vector<bool> flags_;
  std::vector<StateIndex> members_;
};

/// States whose cell centers lie inside the closed box [lo, hi].
/// Throws std::invalid_argument unless lo <= hi componentwise.
ZoneMask box_mask(const StructuredGrid& grid, const Vec3& lo, const Vec3& hi);

}  // namespace pfsensor

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

// Nanobeam geometry: hole lists and staggered permittivity grids.
//
// Lengths are in nm throughout. Coordinates: x runs along the beam, y across
// its width, z through its thickness. The beam is centered on the origin.

namespace nanobeam {

struct DeviceSpec
{
  double thickness = 150.0;       // t
  double width = 264.0;           // w
  double index = 2.4;             // n
  double mirror_period = 225.0;   // a0
  double taper_end_period = 179.0;// a_N, period next to the cavity center
  double radius_ratio = 0.28;     // r / a
  int mirror_pairs = 15;          // mirror-period holes per side
  int taper_holes = 5;            // taper holes per side
  double cavity_gap = 80.0;       // s, edge-to-edge gap of the innermost pair

  double permittivity() const { return index * index; }

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

struct Hole
{
  double center_x;
  double radius;

  friend bool operator==(Hole const&, Hole const&) = default;
};

using HoleList = std::vector<Hole>;

/// Taper periods a_1..a_N stepping linearly from a0 down to aN.
std::vector<double> taper_profile(double a0, double aN, int taper_holes);

/// Holes sorted by ascending center_x, mirror-symmetric about x = 0.
HoleList build_hole_list(DeviceSpec const& spec);

void write_holes_csv(std::ostream& os, HoleList const& holes);

// ---------------------------------------------------------------------------
// Staggered grid
// ---------------------------------------------------------------------------

enum class Component : int { Ex = 0, Ey = 1, Ez = 2, Hx = 3, Hy = 4, Hz = 5 };

constexpr int axis_of(Component c) { return static_cast<int>(c) % 3; }
constexpr bool is_electric(Component c) { return static_cast<int>(c) < 3; }
char const* component_name(Component c);

/// Offset of a component sample from its integer node, in units of a cell,
/// along `axis`: 0 (node) or 1/2 (half cell). E_a sits half a cell along a;
/// H_a sits half a cell along the two other axes.
constexpr bool half_offset(Component c, int axis)
{
  return is_electric(c) ? axis_of(c) == axis : axis_of(c) != axis;
}

using Index3 = std::array<int, 3>;

/// Cell layout shared by the permittivity and field arrays. Every component
/// array is stored with one ghost layer on each side: logical index -1..n.
struct GridShape
{
  Index3 cells{};                 // number of cells per axis
  std::array<double, 3> spacing{};// nm per axis
  // Coordinate of node (0, 0, 0) in cells. Kept in cell units so mirrored
  // samples have exactly negated coordinates.
  std::array<double, 3> origin{};

  std::ptrdiff_t stride(int axis) const
  {
    switch (axis) {
    case 0: return std::ptrdiff_t(cells[1] + 2) * (cells[2] + 2);
    case 1: return cells[2] + 2;
    default: return 1;
    }
  }
  std::size_t storage_size() const
  {
    return std::size_t(cells[0] + 2) * (cells[1] + 2) * (cells[2] + 2);
  }
  std::ptrdiff_t offset(int i, int j, int k) const
  {
    return (std::ptrdiff_t(i + 1) * (cells[1] + 2) + (j + 1)) * (cells[2] + 2) + (k + 1);
  }
  std::ptrdiff_t offset(Index3 const& p) const { return offset(p[0], p[1], p[2]); }

  /// Physical coordinate of a component sample.
  double coordinate(Component c, int axis, int index) const
  {
    return (origin[axis] + index + (half_offset(c, axis) ? 0.5 : 0.0)) * spacing[axis];
  }

  double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

  /// Index where a component has physical samples along `axis`: node-aligned
  /// samples run 0..n, half-offset samples 0..n-1.
  int last_index(Component c, int axis) const
  {
    return half_offset(c, axis) ? cells[axis] - 1 : cells[axis];
  }
};

/// Relative permittivity at the Ex, Ey, Ez sample locations.
struct PermittivityGrid
{
  GridShape shape;
  double eps_material = 1.0; // largest value present, n^2
  std::array<Eigen::ArrayXd, 3> eps;

  double at(Component c, int i, int j, int k) const
  {
    return eps[axis_of(c)][shape.offset(i, j, k)];
  }
};

/// Point-membership test: true where the point lies inside material.
using MaterialTest = std::function<bool(double x, double y, double z)>;

namespace detail {
/// Per-cell classification hint: +1 all material, -1 all air, 0 mixed.
using CellClassifier = std::function<int(std::array<double, 3> const& lo,
                                         std::array<double, 3> const& hi)>;
}

/// Fill eps by volume-fraction averaging with K^3 subcell samples around
/// every staggered sample location.
PermittivityGrid rasterize_function(GridShape const& shape, double eps_material,
                                    MaterialTest const& inside, int subsamples = 4,
                                    detail::CellClassifier const& classify = {});

struct RasterOptions
{
  double spacing = 10.0;
  std::array<double, 3> padding{400.0, 400.0, 400.0}; // air around the beam / last hole
  int boundary_cells = 12;                             // absorbing layer cells per face
  std::array<bool, 3> mirrored{false, false, false};   // keep only the non-negative half
  int subsamples = 4;
};

/// Discretize the full nanobeam. The beam runs through the whole x extent
/// (so it continues into the absorbing layers).
PermittivityGrid rasterize(HoleList const& holes, DeviceSpec const& spec, RasterOptions const& opt);

/// One a0-long period of the mirror, centered hole at x = 0, periodic in x.
/// The x spacing is stretched to a0 / round(a0 / spacing) so the period is exact.
PermittivityGrid mirror_unit_cell(DeviceSpec const& spec, double spacing,
                                  RasterOptions const& opt = {});

/// Hole-free beam segment of `length` nm, periodic in x.
PermittivityGrid waveguide_cell(DeviceSpec const& spec, double spacing, double length,
                                RasterOptions const& opt = {});

/// Analytic beam-minus-holes volume inside [x_lo, x_hi].
double dielectric_volume(HoleList const& holes, DeviceSpec const& spec, double x_lo, double x_hi);

} // namespace nanobeam

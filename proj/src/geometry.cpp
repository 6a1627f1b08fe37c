#include "nanobeam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nanobeam/io.hpp"

namespace nanobeam {

void DeviceSpec::validate() const
{
  auto fail = [](std::string const& what) { throw std::invalid_argument("DeviceSpec: " + what); };
  if (!(thickness > 0)) fail("thickness must be > 0");
  if (!(width > 0)) fail("width must be > 0");
  if (!(index >= 1)) fail("index must be >= 1");
  if (!(mirror_period > 0)) fail("mirror_period must be > 0");
  if (!(taper_end_period > 0)) fail("taper_end_period must be > 0");
  if (!(radius_ratio > 0 && radius_ratio < 0.5)) fail("radius_ratio must lie in (0, 0.5)");
  if (taper_end_period > mirror_period) fail("taper_end_period must not exceed mirror_period");
  if (mirror_pairs < 0 || taper_holes < 0) fail("hole counts must be non-negative");
  if (mirror_pairs + taper_holes == 0) fail("device needs at least one hole per side");
  if (!(cavity_gap >= 0)) fail("cavity_gap must be >= 0");
  if (!(2 * radius_ratio * mirror_period < width)) fail("holes cut through the beam edge (2 r >= w)");
}

std::vector<double> taper_profile(double a0, double aN, int taper_holes)
{
  if (!(a0 > 0) || !(aN > 0)) throw std::invalid_argument("taper_profile: periods must be positive");
  if (aN > a0) throw std::invalid_argument("taper_profile: aN must not exceed a0");
  if (taper_holes < 0) throw std::invalid_argument("taper_profile: negative taper length");
  if (taper_holes == 0) {
    if (a0 != aN) throw std::invalid_argument("taper_profile: no taper holes but a0 != aN");
    return {};
  }
  std::vector<double> periods(taper_holes);
  double const step = (a0 - aN) / taper_holes;
  for (int k = 1; k <= taper_holes; ++k) periods[k - 1] = a0 - k * step;
  periods.back() = aN;
  return periods;
}

HoleList build_hole_list(DeviceSpec const& spec)
{
  spec.validate();
  auto const taper = taper_profile(spec.mirror_period, spec.taper_end_period, spec.taper_holes);

  // Periods listed from the center outward: a_N, ..., a_1, then a0 per mirror hole.
  std::vector<double> periods(taper.rbegin(), taper.rend());
  periods.insert(periods.end(), spec.mirror_pairs, spec.mirror_period);

  std::vector<Hole> right;
  right.reserve(periods.size());
  double x = spec.cavity_gap / 2 + spec.radius_ratio * periods.front();
  for (std::size_t m = 0; m < periods.size(); ++m) {
    double const r = spec.radius_ratio * periods[m];
    if (m == 0 && x - r < 0) {
      throw std::invalid_argument("build_hole_list: innermost holes overlap");
    }
    right.push_back({x, r});
    x += periods[m];
  }
  for (std::size_t m = 0; m + 1 < right.size(); ++m) {
    if (right[m + 1].center_x - right[m].center_x <= right[m].radius + right[m + 1].radius) {
      std::ostringstream msg;
      msg << "build_hole_list: holes " << m << " and " << m + 1 << " overlap";
      throw std::invalid_argument(msg.str());
    }
  }
  if (2 * right.front().center_x < 2 * right.front().radius) {
    throw std::invalid_argument("build_hole_list: innermost holes overlap");
  }

  HoleList holes;
  holes.reserve(2 * right.size());
  for (auto it = right.rbegin(); it != right.rend(); ++it) holes.push_back({-it->center_x, it->radius});
  holes.insert(holes.end(), right.begin(), right.end());
  return holes;
}

void write_holes_csv(std::ostream& os, HoleList const& holes)
{
  os << "center_x_nm,radius_nm\n";
  for (auto const& h : holes) os << format_double(h.center_x) << ',' << format_double(h.radius) << '\n';
}

char const* component_name(Component c)
{
  static char const* names[] = {"Ex", "Ey", "Ez", "Hx", "Hy", "Hz"};
  return names[static_cast<int>(c)];
}

PermittivityGrid rasterize_function(GridShape const& shape, double eps_material,
                                    MaterialTest const& inside, int subsamples,
                                    detail::CellClassifier const& classify)
{
  if (subsamples < 1) throw std::invalid_argument("rasterize: subsamples must be >= 1");
  PermittivityGrid grid;
  grid.shape = shape;
  grid.eps_material = eps_material;

  int const K = subsamples;
  int const total = K * K * K;
  std::vector<double> frac(K);
  for (int q = 0; q < K; ++q) frac[q] = (q + 0.5) / K - 0.5;

  for (int a = 0; a < 3; ++a) {
    auto const comp = static_cast<Component>(a);
    auto& eps = grid.eps[a];
    eps.setOnes(shape.storage_size());
    Index3 last{};
    for (int b = 0; b < 3; ++b) last[b] = shape.last_index(comp, b);
    std::array<double, 3> off{};
    for (int b = 0; b < 3; ++b) off[b] = half_offset(comp, b) ? 0.5 : 0.0;

    for (int i = 0; i <= last[0]; ++i) {
      for (int j = 0; j <= last[1]; ++j) {
        for (int k = 0; k <= last[2]; ++k) {
          // Sample center in cell units, relative to the coordinate origin.
          std::array<double, 3> const c{shape.origin[0] + i + off[0], shape.origin[1] + j + off[1],
                                        shape.origin[2] + k + off[2]};
          int hint = 0;
          if (classify) {
            std::array<double, 3> lo{}, hi{};
            for (int b = 0; b < 3; ++b) {
              lo[b] = (c[b] - 0.5) * shape.spacing[b];
              hi[b] = (c[b] + 0.5) * shape.spacing[b];
            }
            hint = classify(lo, hi);
          }
          double value;
          if (hint > 0) {
            value = eps_material;
          } else if (hint < 0) {
            value = 1.0;
          } else {
            int count = 0;
            for (int qx = 0; qx < K; ++qx) {
              double const x = (c[0] + frac[qx]) * shape.spacing[0];
              for (int qy = 0; qy < K; ++qy) {
                double const y = (c[1] + frac[qy]) * shape.spacing[1];
                for (int qz = 0; qz < K; ++qz) {
                  double const z = (c[2] + frac[qz]) * shape.spacing[2];
                  count += inside(x, y, z) ? 1 : 0;
                }
              }
            }
            if (count == total) value = eps_material;
            else if (count == 0) value = 1.0;
            else value = 1.0 + (eps_material - 1.0) * double(count) / total;
          }
          eps[shape.offset(i, j, k)] = value;
        }
      }
    }
  }
  return grid;
}

namespace {

// Beam of rectangular cross-section along x with cylindrical holes on axis.
// `period` > 0 makes the hole pattern periodic in x (hole list holds one cell).
class BeamModel
{
public:
  BeamModel(HoleList holes, DeviceSpec const& spec, double period = 0.0)
      : holes_(std::move(holes)), half_w_(spec.width / 2), half_t_(spec.thickness / 2), period_(period)
  {
    std::sort(holes_.begin(), holes_.end(), [](Hole const& a, Hole const& b) { return a.center_x < b.center_x; });
    for (auto const& h : holes_) max_r_ = std::max(max_r_, h.radius);
  }

  double wrap(double x) const
  {
    if (period_ <= 0) return x;
    return x - period_ * std::round(x / period_);
  }

  bool in_hole(double x, double y) const
  {
    x = wrap(x);
    auto it = std::lower_bound(holes_.begin(), holes_.end(), x - max_r_,
                               [](Hole const& h, double v) { return h.center_x < v; });
    for (; it != holes_.end() && it->center_x <= x + max_r_; ++it) {
      double const dx = x - it->center_x;
      if (dx * dx + y * y < it->radius * it->radius) return true;
    }
    return false;
  }

  bool inside(double x, double y, double z) const
  {
    if (std::abs(y) > half_w_ || std::abs(z) > half_t_) return false;
    return !in_hole(x, y);
  }

  int classify(std::array<double, 3> const& lo, std::array<double, 3> const& hi) const
  {
    auto abs_min = [](double l, double h) { return (l <= 0 && h >= 0) ? 0.0 : std::min(std::abs(l), std::abs(h)); };
    auto abs_max = [](double l, double h) { return std::max(std::abs(l), std::abs(h)); };
    if (abs_min(lo[1], hi[1]) > half_w_ || abs_min(lo[2], hi[2]) > half_t_) return -1;
    if (abs_max(lo[1], hi[1]) > half_w_ || abs_max(lo[2], hi[2]) > half_t_) return 0;
    // Fully inside the slab: material unless a hole's bounding box touches the cell.
    if (abs_min(lo[1], hi[1]) >= max_r_) return 1;
    if (period_ > 0 && hi[0] - lo[0] >= period_) return 0;
    double const xl = wrap(lo[0]);
    double const xh = xl + (hi[0] - lo[0]);
    auto touches = [&](double shift) {
      auto it = std::lower_bound(holes_.begin(), holes_.end(), xl + shift - max_r_,
                                 [](Hole const& h, double v) { return h.center_x < v; });
      return it != holes_.end() && it->center_x <= xh + shift + max_r_;
    };
    if (touches(0.0)) return 0;
    if (period_ > 0 && (touches(period_) || touches(-period_))) return 0;
    return 1;
  }

private:
  HoleList holes_;
  double half_w_, half_t_, period_;
  double max_r_ = 0.0;
};

// Half-extents in cells, rounded up, and the resulting [origin, cells].
void lay_out_axis(GridShape& shape, int axis, double half_extent, double spacing, int boundary_cells, bool mirrored)
{
  int const half = int(std::ceil(half_extent / spacing - 1e-9)) + boundary_cells;
  shape.spacing[axis] = spacing;
  shape.cells[axis] = mirrored ? half : 2 * half;
  shape.origin[axis] = mirrored ? 0.0 : -double(half);
}

PermittivityGrid rasterize_model(BeamModel const& model, GridShape const& shape, DeviceSpec const& spec,
                                 int subsamples)
{
  return rasterize_function(
      shape, spec.permittivity(), [&](double x, double y, double z) { return model.inside(x, y, z); }, subsamples,
      [&](auto const& lo, auto const& hi) { return model.classify(lo, hi); });
}

void check_resolution(double spacing, double smallest_radius)
{
  if (!(spacing > 0)) throw std::invalid_argument("rasterize: spacing must be > 0");
  if (spacing > smallest_radius) {
    throw std::invalid_argument("rasterize: spacing " + format_double(spacing) +
                                " nm exceeds the smallest hole radius " + format_double(smallest_radius) + " nm");
  }
}

void check_padding(RasterOptions const& opt)
{
  for (double p : opt.padding)
    if (!(p >= 0)) throw std::invalid_argument("rasterize: padding must be >= 0");
  if (opt.boundary_cells < 0) throw std::invalid_argument("rasterize: boundary_cells must be >= 0");
}

} // namespace

PermittivityGrid rasterize(HoleList const& holes, DeviceSpec const& spec, RasterOptions const& opt)
{
  spec.validate();
  check_padding(opt);
  double min_r = std::numeric_limits<double>::infinity();
  double x_reach = 0;
  for (auto const& h : holes) {
    min_r = std::min(min_r, h.radius);
    x_reach = std::max(x_reach, std::abs(h.center_x) + h.radius);
  }
  check_resolution(opt.spacing, min_r);

  GridShape shape;
  lay_out_axis(shape, 0, x_reach + opt.padding[0], opt.spacing, opt.boundary_cells, opt.mirrored[0]);
  lay_out_axis(shape, 1, spec.width / 2 + opt.padding[1], opt.spacing, opt.boundary_cells, opt.mirrored[1]);
  lay_out_axis(shape, 2, spec.thickness / 2 + opt.padding[2], opt.spacing, opt.boundary_cells, opt.mirrored[2]);
  return rasterize_model(BeamModel(holes, spec), shape, spec, opt.subsamples);
}

namespace {

PermittivityGrid periodic_cell(DeviceSpec const& spec, double spacing, double length, HoleList holes,
                               RasterOptions const& opt)
{
  check_padding(opt);
  int const nx = std::max(1, int(std::lround(length / spacing)));
  GridShape shape;
  shape.spacing[0] = length / nx;
  shape.cells[0] = nx;
  shape.origin[0] = -0.5 * nx;
  lay_out_axis(shape, 1, spec.width / 2 + opt.padding[1], spacing, opt.boundary_cells, opt.mirrored[1]);
  lay_out_axis(shape, 2, spec.thickness / 2 + opt.padding[2], spacing, opt.boundary_cells, opt.mirrored[2]);
  return rasterize_model(BeamModel(std::move(holes), spec, length), shape, spec, opt.subsamples);
}

} // namespace

PermittivityGrid mirror_unit_cell(DeviceSpec const& spec, double spacing, RasterOptions const& opt)
{
  spec.validate();
  double const r = spec.radius_ratio * spec.mirror_period;
  check_resolution(spacing, r);
  return periodic_cell(spec, spacing, spec.mirror_period, {{0.0, r}}, opt);
}

PermittivityGrid waveguide_cell(DeviceSpec const& spec, double spacing, double length, RasterOptions const& opt)
{
  if (!(spacing > 0) || !(length > 0)) throw std::invalid_argument("waveguide_cell: spacing and length must be > 0");
  return periodic_cell(spec, spacing, length, {}, opt);
}

double dielectric_volume(HoleList const& holes, DeviceSpec const& spec, double x_lo, double x_hi)
{
  double v = spec.width * spec.thickness * (x_hi - x_lo);
  for (auto const& h : holes) {
    if (h.center_x - h.radius >= x_lo && h.center_x + h.radius <= x_hi) {
      v -= std::numbers::pi * h.radius * h.radius * spec.thickness;
    }
  }
  return v;
}

} // namespace nanobeam

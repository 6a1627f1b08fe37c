#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nanobeam/geometry.hpp"

using namespace nanobeam;

namespace {

DeviceSpec reference_spec(double s = 80.0)
{
  return {150.0, 264.0, 2.4, 225.0, 179.0, 0.28, 15, 5, s};
}

} // namespace

TEST_SUITE("geometry")
{
  TEST_CASE("taper profile steps linearly to the center period")
  {
    auto const a = taper_profile(225.0, 179.0, 5);
    std::vector<double> const expected{215.8, 206.6, 197.4, 188.2, 179.0};
    REQUIRE(a.size() == expected.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(expected[k]).epsilon(1e-12));
    CHECK(taper_profile(225.0, 225.0, 5) == std::vector<double>(5, 225.0));
    CHECK(taper_profile(225.0, 179.0, 1) == std::vector<double>{179.0});
  }

  TEST_CASE("taper profile rejects an empty span and bad lengths")
  {
    CHECK_THROWS_AS(taper_profile(225.0, 179.0, 0), std::invalid_argument);
    CHECK_NOTHROW(taper_profile(225.0, 225.0, 0));
    CHECK_THROWS_AS(taper_profile(-1.0, -2.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(taper_profile(179.0, 225.0, 3), std::invalid_argument);
  }

  TEST_CASE("hole list places holes by the edge-gap rule")
  {
    auto const spec = reference_spec(80.0);
    auto const holes = build_hole_list(spec);
    REQUIRE(holes.size() == 40);

    // Walk outward from the center with an independent accumulation.
    std::vector<double> periods{179.0, 188.2, 197.4, 206.6, 215.8};
    std::vector<double> radii;
    for (double a : periods) radii.push_back(0.28 * a);
    for (int m = 0; m < 15; ++m) radii.push_back(0.28 * 225.0);
    std::vector<double> step = periods;
    for (int m = 0; m < 14; ++m) step.push_back(225.0);

    double x = 80.0 / 2.0 + 0.28 * 179.0;
    CHECK(x == doctest::Approx(90.12));
    CHECK(radii.front() == doctest::Approx(50.12));
    for (std::size_t k = 0; k < 20; ++k) {
      auto const& right = holes[20 + k];
      auto const& left = holes[19 - k];
      CHECK(right.center_x == doctest::Approx(x).epsilon(1e-12));
      CHECK(right.radius == doctest::Approx(radii[k]).epsilon(1e-12));
      CHECK(left.center_x == -right.center_x);
      CHECK(left.radius == right.radius);
      if (k < step.size()) x += step[k];
    }
  }

  TEST_CASE("hole list is sorted, symmetric and non-overlapping")
  {
    for (double s : {0.0, 40.0, 82.0, 95.0}) {
      auto const holes = build_hole_list(reference_spec(s));
      CHECK(std::is_sorted(holes.begin(), holes.end(),
                           [](Hole const& a, Hole const& b) { return a.center_x < b.center_x; }));
      for (std::size_t i = 0; i + 1 < holes.size(); ++i)
        CHECK(holes[i + 1].center_x - holes[i].center_x >= holes[i].radius + holes[i + 1].radius);
      std::set<std::pair<double, double>> a, b;
      for (auto const& h : holes) {
        a.insert({h.center_x, h.radius});
        b.insert({-h.center_x, h.radius});
      }
      CHECK(a == b);
    }
  }

  TEST_CASE("zero-gap single pair touches at the center")
  {
    DeviceSpec spec = reference_spec(0.0);
    spec.mirror_pairs = 1;
    spec.taper_holes = 0;
    spec.taper_end_period = 225.0;
    auto const holes = build_hole_list(spec);
    REQUIRE(holes.size() == 2);
    CHECK(holes[1].center_x == doctest::Approx(63.0));
    CHECK(holes[0].center_x == doctest::Approx(-63.0));
  }

  TEST_CASE("device spec validation")
  {
    auto bad = reference_spec();
    bad.radius_ratio = 0.6;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = reference_spec();
    bad.taper_end_period = 240.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = reference_spec();
    bad.cavity_gap = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = reference_spec();
    bad.width = 100.0; // 2 r a0 = 126 nm exceeds the beam width
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("hole csv export")
  {
    std::ostringstream os;
    write_holes_csv(os, build_hole_list(reference_spec()));
    std::string line;
    std::istringstream is(os.str());
    std::getline(is, line);
    CHECK(line == "center_x_nm,radius_nm");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 40);
  }

  TEST_CASE("rasterization values")
  {
    auto const spec = reference_spec();
    RasterOptions opt;
    opt.spacing = 10.0;
    opt.padding = {100.0, 100.0, 100.0};
    auto const grid = rasterize(build_hole_list(spec), spec, opt);
    for (int c = 0; c < 3; ++c) {
      double lo = 1e9, hi = -1e9;
      auto const comp = static_cast<Component>(c);
      for (int i = 0; i <= grid.shape.last_index(comp, 0); ++i)
        for (int j = 0; j <= grid.shape.last_index(comp, 1); ++j)
          for (int k = 0; k <= grid.shape.last_index(comp, 2); ++k) {
            double const v = grid.at(comp, i, j, k);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
      CHECK(lo == 1.0);
      CHECK(hi == 5.76);
    }

    // A sample deep inside solid beam material and one far in air.
    Component const c = Component::Ey;
    auto index_of = [&](int axis, double x) {
      return int(std::lround(x / grid.shape.spacing[axis] - grid.shape.origin[axis] - (half_offset(c, axis) ? 0.5 : 0)));
    };
    int const i_solid = index_of(0, 0.0); // x = 0 sits in the gap between the center holes
    CHECK(grid.at(c, i_solid, index_of(1, 0.0), index_of(2, 0.0)) == 5.76);
    CHECK(grid.at(c, i_solid, index_of(1, 0.0), grid.shape.last_index(c, 2)) == 1.0);
  }

  TEST_CASE("straight interface through a sample averages to the midpoint")
  {
    GridShape shape;
    shape.cells = {4, 4, 4};
    shape.spacing = {10, 10, 10};
    // Ex at (i + 1/2, j, k): the plane y = 20 passes through the sample at j = 2.
    auto const grid = rasterize_function(shape, 5.76, [](double, double y, double) { return y < 20.0; }, 8);
    CHECK(grid.at(Component::Ex, 1, 2, 2) == doctest::Approx(3.38).epsilon(1e-3));
    CHECK(grid.at(Component::Ex, 1, 1, 2) == 5.76);
    CHECK(grid.at(Component::Ex, 1, 3, 2) == 1.0);
  }

  TEST_CASE("dielectric mass matches the analytic volume at 5 nm")
  {
    auto spec = reference_spec();
    spec.mirror_pairs = 4;
    auto const holes = build_hole_list(spec);
    RasterOptions opt;
    opt.spacing = 5.0;
    opt.padding = {50.0, 50.0, 50.0};
    opt.boundary_cells = 0;
    auto const grid = rasterize(holes, spec, opt);
    auto const& s = grid.shape;
    double const x_lo = s.origin[0] * s.spacing[0];
    double const x_hi = x_lo + s.cells[0] * s.spacing[0];
    // Cell-centered mass from the Ez samples (z-offset, node-aligned in x and y);
    // sample (i, j) covers [x - h/2, x + h/2], so trim half a cell at each x end.
    double mass = 0.0;
    Component const c = Component::Ez;
    for (int i = 1; i < s.cells[0]; ++i)
      for (int j = 1; j < s.cells[1]; ++j)
        for (int k = 0; k < s.cells[2]; ++k) mass += (grid.at(c, i, j, k) - 1.0) * s.cell_volume();
    double const analytic =
        dielectric_volume(holes, spec, x_lo + 0.5 * s.spacing[0], x_hi - 0.5 * s.spacing[0]) * (5.76 - 1.0);
    CHECK(std::abs(mass - analytic) / analytic < 0.01);
  }

  TEST_CASE("mirror unit cell")
  {
    auto const spec = reference_spec();
    RasterOptions opt;
    opt.padding = {0.0, 200.0, 200.0};
    auto const cell = mirror_unit_cell(spec, 10.0, opt);
    CHECK(cell.shape.cells[0] == 23); // 22.5 rounds up
    CHECK(cell.shape.cells[0] * cell.shape.spacing[0] == doctest::Approx(225.0));
    // Even in y and z about the axis for the full cross-section.
    Component const c = Component::Ex;
    int const ny = cell.shape.cells[1], nz = cell.shape.cells[2];
    CHECK(cell.shape.origin[1] == doctest::Approx(-0.5 * ny));
    for (int i = 0; i <= cell.shape.last_index(c, 0); ++i)
      for (int j = 0; j <= ny; ++j)
        for (int k = 0; k <= nz; ++k) CHECK(cell.at(c, i, j, k) == cell.at(c, i, ny - j, nz - k));
  }

  TEST_CASE("spacing coarser than the smallest hole is rejected")
  {
    auto const spec = reference_spec();
    RasterOptions opt;
    opt.spacing = 60.0;
    CHECK_THROWS_AS(rasterize(build_hole_list(spec), spec, opt), std::invalid_argument);
  }
}

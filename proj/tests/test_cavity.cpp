#include <doctest.h>

#include <cmath>

#include "nanobeam/cavity.hpp"

using namespace nanobeam;
using namespace nanobeam::cavity;

TEST_SUITE("cavity")
{
  TEST_CASE("untapered reference keeps hole count and center gap")
  {
    DeviceSpec spec;
    spec.cavity_gap = 82.0;
    auto const tapered = build_hole_list(spec);
    auto const flat = untapered_holes(spec);
    REQUIRE(flat.size() == tapered.size());
    std::size_t const mid = flat.size() / 2;
    double const r = 0.28 * 225.0;
    CHECK(flat[mid].center_x == doctest::Approx(41.0 + r));
    for (std::size_t i = mid; i + 1 < flat.size(); ++i) {
      CHECK(flat[i].radius == doctest::Approx(r));
      CHECK(flat[i + 1].center_x - flat[i].center_x == doctest::Approx(225.0));
    }
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat[i].center_x == -flat[flat.size() - 1 - i].center_x);
  }

  TEST_CASE("coarse octant run finds a confined mode")
  {
    DeviceSpec spec;
    spec.cavity_gap = 82.0;
    spec.mirror_pairs = 8;
    CavityOptions opt;
    opt.raster.spacing = 20.0;
    opt.raster.padding = {200.0, 200.0, 200.0};
    opt.courant_factor = 0.9;
    opt.window_steps = 2000;
    opt.band = {560.0, 720.0};
    opt.projection_periods = 8;
    auto const r = resonate(spec, opt);
    auto const& res = r.resonance;
    CHECK(res.gap_s == 82.0);
    CHECK(opt.band.contains(res.wavelength));
    CHECK(res.Q > 100.0);
    CHECK(res.V > 0.1);
    CHECK(res.V < 2.0);

    // Midplane slice: unfolded, normalized and even in x and y.
    auto const& s = r.midplane;
    REQUIRE(s.values.size() == std::size_t(s.dims[0]) * s.dims[1]);
    double peak = 0.0;
    for (double v : s.values) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0));
    for (int i = 0; i < s.dims[0]; ++i)
      for (int j = 0; j < s.dims[1]; ++j) {
        double const a = s.values[i * s.dims[1] + j];
        CHECK(a == s.values[(s.dims[0] - 1 - i) * s.dims[1] + j]);
        CHECK(a == s.values[i * s.dims[1] + (s.dims[1] - 1 - j)]);
      }
  }

  TEST_CASE("a band without modes reports the probe spectrum")
  {
    DeviceSpec spec;
    spec.mirror_pairs = 4;
    CavityOptions opt;
    opt.raster.spacing = 20.0;
    opt.raster.padding = {100.0, 100.0, 100.0};
    opt.courant_factor = 0.9;
    opt.window_steps = 600;
    opt.band = {300.0, 320.0};
    try {
      resonate(spec, opt);
      FAIL("expected NoModeError");
    } catch (NoModeError const& e) {
      CHECK_FALSE(e.spectrum.empty());
    }
  }

  TEST_CASE("option checks")
  {
    CavityOptions opt;
    opt.window_steps = 10;
    CHECK_THROWS_AS(resonate(DeviceSpec{}, opt), std::invalid_argument);
  }
}

#include <doctest.h>

#include <cmath>

#include "nanobeam/tmm.hpp"
#include "nanobeam/validation.hpp"

using namespace nanobeam;
using namespace nanobeam::tmm;

TEST_SUITE("tmm")
{
  TEST_CASE("single quarter-wave layer")
  {
    LayerStack s{1.0, 1.0, {{2.4, 637.0 / (4.0 * 2.4)}}};
    double const n2 = 2.4 * 2.4;
    double const R = std::pow((1.0 - n2) / (1.0 + n2), 2);
    auto const rt = stack_rt(s, 637.0);
    CHECK(rt.R == doctest::Approx(R).epsilon(1e-12));
    CHECK(rt.R + rt.T == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("half-wave layer is absent at its design wavelength")
  {
    LayerStack s{1.0, 1.0, {{2.4, 637.0 / (2.0 * 2.4)}}};
    CHECK(stack_rt(s, 637.0).R == doctest::Approx(0.0).scale(1.0));
    CHECK(stack_rt(s, 637.0).T == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("quarter-wave mirror reflectance from the admittance product")
  {
    for (int N : {1, 3, 6}) {
      auto const s = quarter_wave_stack(2.4, 1.0, N, 637.0);
      CHECK(s.layers.size() == std::size_t(2 * N));
      double const Y = std::pow(2.4 / 1.0, 2 * N);
      double const R = std::pow((1.0 - Y) / (1.0 + Y), 2);
      CHECK(stack_rt(s, 637.0).R == doctest::Approx(R).epsilon(1e-10));
    }
  }

  TEST_CASE("energy balance and reciprocity off resonance")
  {
    auto const s = defect_stack(2.4, 1.45, 3, 637.0, 637.0 / (4.0 * 1.45));
    for (double lam : {480.0, 560.0, 637.3, 700.0, 810.0}) {
      auto const a = stack_rt(s, lam);
      auto const b = stack_rt(s.reversed(), lam);
      CHECK(a.R + a.T == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(a.R == doctest::Approx(b.R).epsilon(1e-10));
    }
    LayerStack sub{1.0, 1.5, {{2.0, 100.0}}};
    auto const rt = stack_rt(sub, 600.0);
    CHECK(rt.R + rt.T == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("defect resonance sits at the design wavelength")
  {
    auto const s = defect_stack(2.4, 1.0, 2, 637.0, 637.0 / 4.0);
    auto const r = stack_resonance(s, 600.0, 680.0);
    CHECK(r.wavelength == doctest::Approx(637.0).epsilon(1e-6));
    CHECK(r.peak_transmission == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.Q == doctest::Approx(r.wavelength / r.fwhm));
    // Half maximum really is reached at the quoted width.
    CHECK(stack_rt(s, r.wavelength + 0.5 * r.fwhm).T == doctest::Approx(0.5).epsilon(0.01));
    CHECK(stack_rt(s, r.wavelength - 0.5 * r.fwhm).T == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("each extra mirror pair multiplies Q by about (nH / nL)^2")
  {
    double prev = 0.0;
    for (int N = 2; N <= 5; ++N) {
      double const Q = stack_resonance(defect_stack(2.4, 1.0, N, 637.0, 637.0 / 4.0), 600.0, 680.0).Q;
      if (prev > 0.0) CHECK(Q / prev == doctest::Approx(2.4 * 2.4).epsilon(0.03));
      prev = Q;
    }
  }

  TEST_CASE("a stack without a defect has no isolated peak in its stop band")
  {
    auto const s = defect_stack(2.4, 1.0, 4, 637.0, 0.0);
    CHECK_THROWS_AS(stack_resonance(s, 600.0, 680.0), std::runtime_error);
  }

  TEST_CASE("rasterized stack keeps the optical thickness")
  {
    auto const s = quarter_wave_stack(2.4, 1.0, 3, 637.0);
    double const h = 2.0;
    auto const g = rasterize_stack(s, h, 100.0, 50.0, 10);
    CHECK(g.shape.cells[1] == 1);
    CHECK(g.shape.cells[2] == 1);
    CHECK(g.eps_material == doctest::Approx(5.76));
    // Integral of eps over the body from the Ey samples against the layer sum.
    double integral = 0.0, expected = 0.0;
    for (auto const& l : s.layers) expected += l.index * l.index * l.thickness;
    double const x0 = 0.0, x1 = s.total_thickness();
    for (int i = 0; i <= g.shape.last_index(Component::Ey, 0); ++i) {
      double const x = g.shape.coordinate(Component::Ey, 0, i);
      if (x - 0.5 * h >= x0 - 1e-9 && x + 0.5 * h <= x1 + 1e-9) integral += g.at(Component::Ey, i, 0, 0) * h;
    }
    // Edge cells straddling the ends contribute partial air; bracket them.
    CHECK(integral <= expected + 1e-9);
    CHECK(integral >= expected - 2.0 * h * 5.76);
    CHECK_THROWS_AS(rasterize_stack(s, 0.0, 10.0, 10.0), std::invalid_argument);
  }

  TEST_CASE("time-domain line agrees with the transfer matrix")
  {
    auto const cmp = validation::compare_stack_spectrum(quarter_wave_stack(2.4, 1.0, 6, 637.0));
    CHECK(cmp.max_R_error < 0.02);
    CHECK(cmp.max_T_error < 0.02);
    auto const q = validation::compare_stack_q(defect_stack(2.4, 1.0, 2, 637.0, 637.0 / 4.0), 600.0, 680.0);
    CHECK(std::abs(q.Q_fdtd - q.Q_tmm) / q.Q_tmm < 0.1);
  }
}

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nanobeam/spectra.hpp"
#include "nanobeam/validation.hpp"

using namespace nanobeam;
using spectra::Window;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> damped(std::vector<std::array<double, 4>> const& modes, std::size_t n, double dt)
{
  // each mode: lambda, Q, amplitude, phase
  std::vector<double> x(n, 0.0);
  for (auto const& m : modes) {
    double const w = kTwoPi / m[0], g = w / (2.0 * m[1]);
    for (std::size_t i = 0; i < n; ++i) {
      double const t = double(i) * dt;
      x[i] += m[2] * std::exp(-g * t) * std::cos(w * t + m[3]);
    }
  }
  return x;
}

spectra::ElectricField zero_field(GridShape const& s)
{
  spectra::ElectricField f;
  f.shape = s;
  for (auto& c : f.E) c = Eigen::ArrayXd::Zero(Eigen::Index(s.storage_size()));
  return f;
}

PermittivityGrid uniform(GridShape const& s, double eps)
{
  PermittivityGrid g;
  g.shape = s;
  g.eps_material = eps;
  for (auto& c : g.eps) c = Eigen::ArrayXd::Constant(Eigen::Index(s.storage_size()), eps);
  return g;
}

} // namespace

TEST_SUITE("spectra")
{
  TEST_CASE("dft peak sits on the driven bin")
  {
    std::size_t const N = 4096;
    double const dt = 2.0;
    int const m0 = 300;
    std::vector<double> x(N);
    for (std::size_t n = 0; n < N; ++n) x[n] = std::cos(kTwoPi * m0 * double(n) / double(N));
    auto const sp = spectra::dft_spectrum(x, dt, {0, N});
    CHECK(sp.size() == N / 2);
    double const expected = double(N) * dt / m0;
    CHECK(spectra::peak_wavelength(sp, {0.9 * expected, 1.1 * expected}) == doctest::Approx(expected));
    CHECK(std::isnan(spectra::peak_wavelength(sp, {1.0, 1.5})));
  }

  TEST_CASE("single mode recovery at high Q")
  {
    auto const a = validation::synthetic_inversion(637.0, 1e6, 16384);
    CHECK(a.Q_error < 0.05);
    CHECK(a.lambda_error < 1e-3);
    auto const b = validation::synthetic_inversion(637.0, 1e5, 8192);
    CHECK(b.Q_error < 0.01);
  }

  TEST_CASE("two modes are separated and ranked by amplitude")
  {
    double const dt = 2.8867513459481287;
    auto const x = damped({{637.0, 5e4, 1.0, 0.4}, {655.0, 2e3, 0.3, -1.1}}, 12000, dt);
    auto const modes = spectra::harmonic_inversion(x, dt, {0, x.size()}, {600.0, 700.0});
    REQUIRE(modes.size() >= 2);
    CHECK(modes[0].wavelength == doctest::Approx(637.0).epsilon(1e-6));
    CHECK(modes[0].Q == doctest::Approx(5e4).epsilon(1e-3));
    CHECK(modes[0].amplitude == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(modes[0].phase == doctest::Approx(0.4).epsilon(1e-3));
    CHECK(modes[1].wavelength == doctest::Approx(655.0).epsilon(1e-5));
    CHECK(modes[1].Q == doctest::Approx(2e3).epsilon(1e-3));
    CHECK(modes[1].amplitude == doctest::Approx(0.3).epsilon(1e-3));
  }

  TEST_CASE("window offset reports the amplitude at the window start")
  {
    double const dt = 3.0;
    double const lambda = 640.0, Q = 1e3;
    auto const x = damped({{lambda, Q, 2.0, 0.0}}, 6000, dt);
    std::size_t const start = 1000;
    auto const modes = spectra::harmonic_inversion(x, dt, {start, x.size()}, {600.0, 700.0});
    REQUIRE(!modes.empty());
    double const g = kTwoPi / lambda / (2.0 * Q);
    CHECK(modes[0].amplitude == doctest::Approx(2.0 * std::exp(-g * double(start) * dt)).epsilon(1e-4));
  }

  TEST_CASE("complex series keep the sign of the frequency")
  {
    double const dt = 2.5, w = kTwoPi / 650.0;
    std::vector<std::complex<double>> z(5000);
    for (std::size_t n = 0; n < z.size(); ++n) z[n] = std::polar(std::exp(-1e-5 * double(n) * dt), w * double(n) * dt);
    auto const pos = spectra::harmonic_inversion(z, dt, {0, z.size()}, {600.0, 700.0});
    REQUIRE(pos.size() == 1);
    CHECK(pos[0].wavelength == doctest::Approx(650.0).epsilon(1e-8));
    CHECK(pos[0].decay == doctest::Approx(1e-5).epsilon(1e-6));
    for (auto& v : z) v = std::conj(v);
    CHECK(spectra::harmonic_inversion(z, dt, {0, z.size()}, {600.0, 700.0}).empty());
  }

  TEST_CASE("out-of-band modes are dropped")
  {
    double const dt = 2.0;
    auto const x = damped({{900.0, 1e4, 1.0, 0.0}}, 8000, dt);
    CHECK(spectra::harmonic_inversion(x, dt, {0, x.size()}, {600.0, 680.0}).empty());
  }

  TEST_CASE("Q from an energy decay slope")
  {
    double const lambda = 637.0, Q = 2.5e4, dt = 5.0;
    double const w = kTwoPi / lambda;
    std::vector<double> e(400);
    for (std::size_t n = 0; n < e.size(); ++n) e[n] = 3.0 * std::exp(-w / Q * double(n) * dt);
    CHECK(spectra::q_from_decay(e, dt, lambda) == doctest::Approx(Q).epsilon(1e-9));
    std::vector<double> flat(10, 1.0);
    CHECK_THROWS_AS(spectra::q_from_decay(flat, dt, lambda), std::invalid_argument);
  }

  TEST_CASE("mode volume of a uniform field is the box volume")
  {
    GridShape s;
    s.cells = {8, 6, 4};
    s.spacing = {10, 10, 10};
    auto f = zero_field(s);
    f.E[1].setOnes();
    auto const g = uniform(s, 1.0);
    double const unit = 637.0 / 2.4;
    double const box = 8 * 6 * 4 * 1000.0;
    CHECK(spectra::mode_volume(f, g, 637.0, 2.4) == doctest::Approx(box / (unit * unit * unit)));
    CHECK(spectra::mode_volume(f, g, 637.0, 2.4, {true, true, false}) ==
          doctest::Approx(4.0 * box / (unit * unit * unit)));
    CHECK(spectra::electric_energy(f, g) == doctest::Approx(box));
  }

  TEST_CASE("mode volume of a single excited sample")
  {
    // One E_y sample touches four cells, each receiving a quarter of its density.
    GridShape s;
    s.cells = {6, 6, 6};
    s.spacing = {5, 5, 5};
    auto f = zero_field(s);
    f.E[1][s.offset(3, 2, 3)] = 1.0;
    auto const g = uniform(s, 5.76);
    double const unit = 637.0 / 2.4;
    CHECK(spectra::mode_volume(f, g, 637.0, 2.4) == doctest::Approx(4.0 * 125.0 / (unit * unit * unit)));
    f.E[1].setZero();
    CHECK_THROWS_AS(spectra::mode_volume(f, g, 637.0, 2.4), std::invalid_argument);
  }
}

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nanobeam/fdtd.hpp"
#include "nanobeam/validation.hpp"

using namespace nanobeam;

namespace {

PermittivityGrid box(Index3 cells, double eps_block)
{
  GridShape shape;
  shape.cells = cells;
  shape.spacing = {10, 10, 10};
  return rasterize_function(shape, eps_block, [](double x, double y, double z) {
    return x > 40 && x < 110 && y > 30 && y < 90 && z > 20 && z < 70;
  });
}

} // namespace

TEST_SUITE("fdtd")
{
  TEST_CASE("time step limit")
  {
    CHECK(fdtd::stability_dt(10.0, 3, 0.99) == doctest::Approx(0.99 * 10.0 / std::sqrt(3.0)));
    CHECK(fdtd::stability_dt(10.0, 1, 0.5) == doctest::Approx(5.0));
    CHECK_THROWS_AS(fdtd::stability_dt(10.0, 3, 1.0), std::invalid_argument);

    GridShape line;
    line.cells = {100, 1, 1};
    line.spacing = {10, 10, 10};
    fdtd::SimulationConfig cfg;
    cfg.courant_factor = 0.5;
    cfg.boundaries = {fdtd::AxisBoundary::absorbing(), fdtd::AxisBoundary::periodic(), fdtd::AxisBoundary::periodic()};
    CHECK(fdtd::stability_dt(line, cfg) == doctest::Approx(5.0));
    cfg.boundaries[1] = fdtd::AxisBoundary::periodic(0.3); // a phase makes the flat axis count
    CHECK(fdtd::stability_dt(line, cfg) == doctest::Approx(0.5 * 10.0 / std::sqrt(2.0)));
  }

  TEST_CASE("gaussian source envelope")
  {
    fdtd::Source s;
    s.wavelength = 637.0;
    s.fractional_bandwidth = 0.1;
    CHECK(s.sigma_t() == doctest::Approx(637.0 / (std::numbers::pi * 0.1)));
    CHECK(s.turn_off_time() == doctest::Approx(10.0 * s.sigma_t()));
    CHECK(s.value(-1.0) == 0.0);
    CHECK(s.value(s.turn_off_time()) == 0.0);
    // Quarter period past the peak the carrier is at its crest.
    double const t = s.peak_time() + 637.0 / 4.0;
    double const u = 637.0 / 4.0;
    CHECK(s.value(t) == doctest::Approx(std::exp(-0.5 * u * u / (s.sigma_t() * s.sigma_t()))));
    s.fractional_bandwidth = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }

  TEST_CASE("configuration checks")
  {
    auto const grid = box({16, 12, 10}, 4.0);
    fdtd::SimulationConfig cfg;
    cfg.courant_factor = 1.2;
    CHECK_THROWS_AS(fdtd::Solver<double>(grid, cfg), std::invalid_argument);
    cfg.courant_factor = 0.5;
    cfg.boundaries[0].high = fdtd::Face::mirror(fdtd::Parity::EvenE);
    CHECK_THROWS_AS(fdtd::Solver<double>(grid, cfg), std::invalid_argument);
    cfg.boundaries[0] = fdtd::AxisBoundary::absorbing(); // 24 layers in 16 cells
    CHECK_THROWS_AS(fdtd::Solver<double>(grid, cfg), std::invalid_argument);
    cfg.boundaries[0].low = fdtd::Face::conductor();
    cfg.boundaries[0].high = fdtd::Face{fdtd::Face::Kind::Periodic, {}, 0.0, fdtd::Parity::EvenE};
    CHECK_THROWS_AS(fdtd::Solver<double>(grid, cfg), std::invalid_argument);
  }

  TEST_CASE("closed box conserves the leapfrog energy")
  {
    auto const grid = box({16, 12, 10}, 5.76);
    fdtd::SimulationConfig cfg;
    fdtd::Solver<double> solver(grid, cfg);
    fdtd::Source src;
    src.wavelength = 150.0;
    src.fractional_bandwidth = 0.5;
    src.position = {7, 5, 4};
    solver.add_source(src);
    while (solver.time() < solver.source_turn_off_time() + solver.dt()) solver.step();
    double const e0 = solver.leapfrog_energy();
    CHECK(e0 > 0.0);
    for (int n = 0; n < 2000; ++n) solver.step();
    CHECK(std::abs(solver.leapfrog_energy() - e0) / e0 < 1e-12);
    // The plain energy oscillates around the invariant but stays close.
    CHECK(fdtd::total_energy(solver.state(), grid) == doctest::Approx(e0).epsilon(0.05));
  }

  TEST_CASE("tangential E vanishes on conductor faces")
  {
    auto const grid = box({16, 12, 10}, 2.0);
    fdtd::SimulationConfig cfg;
    fdtd::Solver<double> solver(grid, cfg);
    fdtd::Source src;
    src.wavelength = 200.0;
    src.fractional_bandwidth = 0.5;
    src.position = {5, 6, 5};
    solver.add_source(src);
    for (int n = 0; n < 400; ++n) solver.step();
    auto const& s = grid.shape;
    double face = 0.0;
    for (int j = 0; j <= s.last_index(Component::Ey, 1); ++j)
      for (int k = 0; k <= s.last_index(Component::Ey, 2); ++k) {
        face = std::max(face, std::abs(solver.state().at(Component::Ey, {0, j, k})));
        face = std::max(face, std::abs(solver.state().at(Component::Ey, {s.cells[0], j, k})));
      }
    CHECK(face == 0.0);
  }

  TEST_CASE("float solver follows the double solver")
  {
    auto const grid = box({16, 12, 10}, 5.76);
    fdtd::SimulationConfig cfg;
    cfg.boundaries[0] = fdtd::AxisBoundary::mirrored(fdtd::Parity::EvenE);
    cfg.num_steps = 300;
    fdtd::Source src;
    src.wavelength = 300.0;
    src.fractional_bandwidth = 0.5;
    src.position = {0, 5, 4};
    std::vector<fdtd::Probe> const probes{{Component::Ey, {2, 6, 5}}};
    auto const d = fdtd::run<double>(grid, cfg, std::span(&src, 1), probes);
    auto const f = fdtd::run<float>(grid, cfg, std::span(&src, 1), probes);
    double peak = 0.0, diff = 0.0;
    for (std::size_t n = 0; n < d.probes[0].values.size(); ++n) {
      peak = std::max(peak, std::abs(d.probes[0].values[n]));
      diff = std::max(diff, std::abs(d.probes[0].values[n] - double(f.probes[0].values[n])));
    }
    CHECK(diff / peak < 1e-4);
  }

  TEST_CASE("pulse travels at c / n")
  {
    CHECK(validation::pulse_speed(1.0) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(validation::pulse_speed(2.4) * 2.4 == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("numerical phase velocity matches the Yee dispersion relation")
  {
    // 1D Yee: sin(w dt / 2) / dt = sin(k h / 2) / h. Solve for k at w = 2 pi / lambda.
    double const lambda = 637.0, h = lambda / 20.0, dt = 0.5 * h;
    double const w = 2.0 * std::numbers::pi / lambda;
    double const k = 2.0 / h * std::asin(h / dt * std::sin(w * dt / 2.0));
    double const expected = w / k - 1.0;
    CHECK(validation::phase_velocity_error(20.0, 0.5) == doctest::Approx(expected).epsilon(0.05));
  }

  TEST_CASE("absorbing layers reflect little")
  {
    CHECK(validation::absorber_reflection() < 1e-6);
    fdtd::Absorbing weak;
    weak.layers = 8;
    weak.target_reflection = 1e-2;
    CHECK(validation::absorber_reflection(weak) > validation::absorber_reflection());
  }

  TEST_CASE("periodic wrap matches an explicitly tiled cell")
  {
    CHECK(validation::bloch_tiling_mismatch(0.0) == 0.0);
    CHECK(validation::bloch_tiling_mismatch(0.3) > 1e-3);
  }

  TEST_CASE("mirror planes reproduce the symmetric full domain")
  {
    CHECK(validation::mirror_mismatch() < 1e-10);
  }

  TEST_CASE("snapshot export")
  {
    auto const grid = box({6, 5, 4}, 2.0);
    fdtd::SimulationConfig cfg;
    fdtd::Solver<double> solver(grid, cfg);
    fdtd::Source src;
    src.wavelength = 100.0;
    src.position = {3, 2, 2};
    solver.add_source(src);
    for (int n = 0; n < 20; ++n) solver.step();
    auto const snap = solver.snapshot();
    auto const dir = std::filesystem::temp_directory_path() / "nanobeam_snapshot_test";
    std::filesystem::create_directories(dir);
    std::string const prefix = (dir / "ey").string();
    fdtd::write_snapshot(prefix, snap, Component::Ey);

    // Ey lives on 7 x 5 x 5 samples (half offset in y only).
    CHECK(std::filesystem::file_size(prefix + ".bin") == 7 * 5 * 5 * sizeof(double));
    std::ifstream bin(prefix + ".bin", std::ios::binary);
    std::vector<double> values(7 * 5 * 5);
    bin.read(reinterpret_cast<char*>(values.data()), std::streamsize(values.size() * sizeof(double)));
    CHECK(values[(3 * 5 + 2) * 5 + 2] == snap.E[1][snap.shape.offset(3, 2, 2)]);

    std::ifstream txt(prefix + ".txt");
    std::stringstream ss;
    ss << txt.rdbuf();
    CHECK(ss.str().find("dims = 7 5 5") != std::string::npos);
    CHECK(ss.str().find("component = Ey") != std::string::npos);
    CHECK(ss.str().find("step = 20") != std::string::npos);
    std::filesystem::remove_all(dir);
  }
}

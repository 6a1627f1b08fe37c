#include "nanobeam/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace nanobeam::cavity {

namespace {

using Real = float;
using cplxf = std::complex<float>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Index3 sample_index(GridShape const& s, Component c, std::array<double, 3> const& p)
{
  Index3 idx{};
  for (int a = 0; a < 3; ++a) {
    double const off = half_offset(c, a) ? 0.5 : 0.0;
    idx[a] = int(std::lround(p[a] / s.spacing[a] - s.origin[a] - off));
  }
  return idx;
}

fdtd::SimulationConfig make_config(CavityOptions const& opt)
{
  fdtd::SimulationConfig cfg;
  cfg.courant_factor = opt.courant_factor;
  if (opt.symmetric) {
    // The fundamental mode: E_y even across x = 0, y = 0 and z = 0.
    cfg.boundaries = {fdtd::AxisBoundary::mirrored(fdtd::Parity::EvenE, opt.absorbing),
                      fdtd::AxisBoundary::mirrored(fdtd::Parity::OddE, opt.absorbing),
                      fdtd::AxisBoundary::mirrored(fdtd::Parity::EvenE, opt.absorbing)};
  } else {
    for (auto& b : cfg.boundaries) b = fdtd::AxisBoundary::absorbing(opt.absorbing);
  }
  return cfg;
}

// Physical probe points in the first octant (nm, given as multiples of the
// cell size); the full domain reads the same points.
std::vector<std::array<double, 3>> probe_points(std::array<double, 3> const& h)
{
  return {{0.0, 0.5 * h[1], 0.0}, {3.0 * h[0], 2.5 * h[1], 1.0 * h[2]}, {7.0 * h[0], 1.5 * h[1], 2.0 * h[2]}};
}

Slice midplane_slice(spectra::ElectricField const& f, bool symmetric)
{
  auto const& s = f.shape;
  auto const& E = f.E[1];
  int const kz = int(std::lround(-s.origin[2]));
  int const nxi = s.last_index(Component::Ey, 0) + 1, nyi = s.last_index(Component::Ey, 1) + 1;
  Slice out;
  out.spacing = s.spacing;
  if (!symmetric) {
    out.dims = {nxi, nyi, 1};
    for (int i = 0; i < nxi; ++i)
      for (int j = 0; j < nyi; ++j) out.values.push_back(E[s.offset(i, j, kz)]);
  } else {
    // Unfold: E_y is even across both mirror planes.
    out.dims = {2 * nxi - 1, 2 * nyi, 1};
    for (int ii = -(nxi - 1); ii < nxi; ++ii)
      for (int jj = -nyi; jj < nyi; ++jj) {
        int const j = jj < 0 ? -jj - 1 : jj;
        out.values.push_back(E[s.offset(std::abs(ii), j, kz)]);
      }
  }
  double peak = 0.0;
  for (double v : out.values) peak = std::max(peak, std::abs(v));
  if (peak > 0)
    for (double& v : out.values) v /= peak;
  return out;
}

} // namespace

HoleList untapered_holes(DeviceSpec const& spec)
{
  DeviceSpec flat = spec;
  flat.taper_end_period = spec.mirror_period;
  return build_hole_list(flat);
}

CavityResult resonate(DeviceSpec const& spec, CavityOptions const& opt, Progress const& progress)
{
  return resonate_holes(build_hole_list(spec), spec, opt, progress);
}

CavityResult resonate_holes(HoleList const& holes, DeviceSpec const& spec, CavityOptions const& opt,
                            Progress const& progress)
{
  if (opt.window_steps < int(opt.harminv.min_window)) {
    throw std::invalid_argument("resonate: window_steps below the harmonic-inversion minimum");
  }
  if (opt.projection_periods < 1 || opt.samples_per_period < 4) {
    throw std::invalid_argument("resonate: need >= 1 projection period and >= 4 samples per period");
  }
  RasterOptions ro = opt.raster;
  ro.mirrored = {opt.symmetric, opt.symmetric, opt.symmetric};
  ro.boundary_cells = opt.absorbing.layers;
  auto const grid = rasterize(holes, spec, ro);
  auto const& shape = grid.shape;
  auto const cfg = make_config(opt);
  fdtd::Solver<Real> solver(grid, cfg);

  fdtd::Source src;
  src.component = Component::Ey;
  src.wavelength = opt.source_wavelength;
  src.fractional_bandwidth = opt.fractional_bandwidth;
  std::array<double, 3> const h = shape.spacing;
  src.position = sample_index(shape, Component::Ey, {0.0, 0.5 * h[1], 0.0});
  solver.add_source(src);
  if (!opt.symmetric) {
    src.position = sample_index(shape, Component::Ey, {0.0, -0.5 * h[1], 0.0});
    solver.add_source(src);
  }

  std::vector<fdtd::Probe> probes;
  for (auto const& p : probe_points(h)) probes.push_back({Component::Ey, sample_index(shape, Component::Ey, p)});
  for (auto const& p : probes) {
    if (solver.in_absorber(p.component, p.position)) throw std::invalid_argument("resonate: probe inside absorber");
  }

  double const dt = solver.dt();
  int const off = std::max(0, int(std::ceil(solver.source_turn_off_time() / dt - 0.5)));
  int const ring_steps = off + opt.window_steps;
  std::vector<std::vector<double>> series(probes.size());
  for (auto& s : series) s.reserve(ring_steps);

  auto planned = [&](double lambda) {
    return ring_steps + int(std::ceil(opt.projection_periods * lambda / dt)) + 1;
  };
  for (int n = 0; n < ring_steps; ++n) {
    solver.step();
    for (std::size_t p = 0; p < probes.size(); ++p) series[p].push_back(double(solver.sample(probes[p])));
    if (progress && (n + 1) % 500 == 0) progress(n + 1, planned(opt.source_wavelength));
  }

  spectra::Window const win{std::size_t(off), std::size_t(ring_steps)};
  CavityResult result;
  result.dt = dt;
  double best_amp = -1.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    auto modes = spectra::harmonic_inversion(series[p], dt, win, opt.band, opt.harminv);
    if (!modes.empty() && modes.front().amplitude > best_amp) {
      best_amp = modes.front().amplitude;
      result.modes = std::move(modes);
    }
  }
  if (result.modes.empty()) {
    throw NoModeError("resonate: no mode between " + std::to_string(opt.band.min_nm) + " and " +
                          std::to_string(opt.band.max_nm) + " nm",
                      spectra::dft_spectrum(series[0], dt, win));
  }
  auto const& mode = result.modes.front();

  // Project the field onto the mode frequency with a Hann window, then pick
  // the phase that maximizes the electric energy.
  int const M = opt.projection_periods * opt.samples_per_period;
  double const T = opt.projection_periods * mode.wavelength;
  std::array<Eigen::Array<cplxf, Eigen::Dynamic, 1>, 3> acc;
  for (auto& a : acc) a.setZero(shape.storage_size());
  int const start = solver.steps_taken();
  int const total = planned(mode.wavelength);
  for (int m = 0; m < M; ++m) {
    double const t_m = (m + 0.5) * T / M;
    int const target = start + std::max(1, int(std::lround(t_m / dt)));
    while (solver.steps_taken() < target) {
      solver.step();
      if (progress && solver.steps_taken() % 500 == 0) progress(solver.steps_taken(), total);
    }
    double const t = solver.time();
    double const w = std::pow(std::sin(std::numbers::pi * (m + 0.5) / M), 2);
    cplxf const phase(std::polar(w, mode.omega * t));
    for (int c = 0; c < 3; ++c) acc[c] += solver.state()[static_cast<Component>(c)].template cast<cplxf>() * phase;
  }

  std::complex<double> cross = 0.0;
  for (int c = 0; c < 3; ++c) {
    auto const& eps = grid.eps[c];
    for (Eigen::Index o = 0; o < acc[c].size(); ++o) cross += eps[o] * std::complex<double>(acc[c][o] * acc[c][o]);
  }
  double const phi = 0.5 * std::arg(cross);
  spectra::ElectricField field;
  field.shape = shape;
  cplxf const rot = std::polar(1.0f, float(-phi));
  for (int c = 0; c < 3; ++c) field.E[c] = (acc[c] * rot).real().template cast<double>();

  std::array<bool, 3> const mirrored{opt.symmetric, opt.symmetric, opt.symmetric};
  double const V = spectra::mode_volume(field, grid, mode.wavelength, spec.index, mirrored);

  result.resonance = {spec.cavity_gap, mode.wavelength, mode.Q, V, mode.amplitude, mode.phase, win.start, win.end};
  result.midplane = midplane_slice(field, opt.symmetric);
  result.midplane.step = solver.steps_taken();
  result.steps = solver.steps_taken();
  return result;
}

} // namespace nanobeam::cavity

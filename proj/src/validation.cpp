#include "nanobeam/validation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "nanobeam/io.hpp"

namespace nanobeam::validation {

namespace {

using cplx = std::complex<double>;

int node_index(GridShape const& shape, double x) { return int(std::lround(x / shape.spacing[0] - shape.origin[0])); }

fdtd::SimulationConfig line_config(double courant_factor)
{
  fdtd::SimulationConfig cfg;
  cfg.courant_factor = courant_factor;
  cfg.boundaries = {fdtd::AxisBoundary::absorbing(), fdtd::AxisBoundary::periodic(), fdtd::AxisBoundary::periodic()};
  return cfg;
}

cplx dft_at(std::vector<double> const& v, double dt, double omega)
{
  cplx sum = 0.0;
  cplx const w = std::polar(1.0, omega * dt);
  cplx ph = w;
  for (double x : v) {
    sum += x * ph;
    ph *= w;
  }
  return sum;
}

double centroid_time(std::vector<double> const& v, double dt)
{
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) {
    num += (n + 1) * dt * v[n] * v[n];
    den += v[n] * v[n];
  }
  return num / den;
}

/// Uniform 1D line of index n: `before` nm ahead of x = 0 and `after` beyond.
PermittivityGrid uniform_line(double index, double spacing, double before, double after)
{
  tmm::LayerStack s{index, index, {{index, after}}};
  return tmm::rasterize_stack(s, spacing, before, 0.0);
}

/// Small closed test grid with an off-center dielectric block.
PermittivityGrid block_grid(Index3 cells, std::array<double, 3> origin, double spacing, std::array<double, 3> lo,
                            std::array<double, 3> hi, double eps)
{
  GridShape shape;
  shape.cells = cells;
  shape.spacing = {spacing, spacing, spacing};
  shape.origin = origin;
  return rasterize_function(shape, eps, [=](double x, double y, double z) {
    return x > lo[0] && x < hi[0] && y > lo[1] && y < hi[1] && z > lo[2] && z < hi[2];
  });
}

template <typename T>
double max_abs(std::vector<T> const& v)
{
  double m = 0.0;
  for (auto const& x : v) m = std::max(m, double(std::abs(x)));
  return m;
}

double optical_length(tmm::LayerStack const& s)
{
  double len = 0.0;
  for (auto const& l : s.layers) len += l.index * l.thickness;
  return len;
}

} // namespace

SpectrumComparison compare_stack_spectrum(tmm::LayerStack const& stack, StackSpectrumOptions const& opt)
{
  stack.validate();
  tmm::LayerStack reference{stack.ambient_left, stack.ambient_left, {{stack.ambient_left, stack.total_thickness()}}};
  auto const grid = tmm::rasterize_stack(stack, opt.spacing, opt.lead, opt.trail);
  auto const ref_grid = tmm::rasterize_stack(reference, opt.spacing, opt.lead, opt.trail);

  fdtd::Source src;
  src.wavelength = opt.lambda0;
  src.fractional_bandwidth = opt.fractional_bandwidth;
  src.position = {node_index(grid.shape, -0.8 * opt.lead), 0, 0};
  std::vector<fdtd::Probe> const probes{
      {Component::Ey, {node_index(grid.shape, -0.4 * opt.lead), 0, 0}},
      {Component::Ey, {node_index(grid.shape, stack.total_thickness() + 0.5 * opt.trail), 0, 0}}};

  auto cfg = line_config(opt.courant_factor);
  double const dt = fdtd::stability_dt(grid.shape, cfg);
  double const span = opt.lead + optical_length(stack) * 4.0 + opt.trail;
  cfg.num_steps = int(std::ceil((2.0 * src.turn_off_time() + 4.0 * span) / dt));

  auto const with = fdtd::run<double>(grid, cfg, std::span(&src, 1), probes);
  auto const without = fdtd::run<double>(ref_grid, cfg, std::span(&src, 1), probes);

  SpectrumComparison out;
  double const ratio = stack.ambient_right / stack.ambient_left;
  for (int m = 0; m < opt.samples; ++m) {
    double const lam = opt.band_min + (opt.band_max - opt.band_min) * m / std::max(1, opt.samples - 1);
    double const w = 2.0 * std::numbers::pi / lam;
    cplx const inc = dft_at(without.probes[0].values, dt, w);
    cplx const refl = dft_at(with.probes[0].values, dt, w) - inc;
    cplx const trans = dft_at(with.probes[1].values, dt, w);
    double const inc2 = std::norm(inc);
    auto const rt = tmm::stack_rt(stack, lam);
    out.wavelength.push_back(lam);
    out.R_fdtd.push_back(std::norm(refl) / inc2);
    out.T_fdtd.push_back(ratio * std::norm(trans) / inc2);
    out.R_tmm.push_back(rt.R);
    out.T_tmm.push_back(rt.T);
    out.max_R_error = std::max(out.max_R_error, std::abs(out.R_fdtd.back() - rt.R));
    out.max_T_error = std::max(out.max_T_error, std::abs(out.T_fdtd.back() - rt.T));
  }
  return out;
}

StackQComparison compare_stack_q(tmm::LayerStack const& stack, double lambda_min, double lambda_max, double spacing,
                                 int steps)
{
  auto const res = tmm::stack_resonance(stack, lambda_min, lambda_max);

  // Excite and probe off-center inside the thickest layer.
  double start = 0.0, best = -1.0, x = 0.0;
  for (auto const& l : stack.layers) {
    if (l.thickness > best) {
      best = l.thickness;
      start = x;
    }
    x += l.thickness;
  }
  auto const grid = tmm::rasterize_stack(stack, spacing, 400.0, 400.0);
  fdtd::Source src;
  src.wavelength = res.wavelength;
  src.fractional_bandwidth = 0.1;
  src.position = {node_index(grid.shape, start + 0.3 * best), 0, 0};
  std::vector<fdtd::Probe> const probes{{Component::Ey, {node_index(grid.shape, start + 0.6 * best), 0, 0}}};

  auto cfg = line_config(0.99);
  cfg.num_steps = steps;
  auto const run = fdtd::run<double>(grid, cfg, std::span(&src, 1), probes);
  if (std::size_t(run.source_off_step) + 1024 > run.probes[0].values.size())
    throw std::invalid_argument("compare_stack_q: too few steps after the source turns off");

  spectra::Window const win{std::size_t(run.source_off_step), run.probes[0].values.size()};
  auto const modes = spectra::harmonic_inversion(run.probes[0].values, run.dt, win, {lambda_min, lambda_max});
  if (modes.empty()) throw std::runtime_error("compare_stack_q: no mode found in band");
  return {res.wavelength, res.Q, modes.front().wavelength, modes.front().Q};
}

double pulse_speed(double index, double spacing, int distance, double courant_factor)
{
  double const L = distance * spacing;
  auto const grid = uniform_line(index, spacing, 100.0 * spacing, L + 100.0 * spacing);
  fdtd::Source src;
  src.fractional_bandwidth = 0.3;
  src.position = {node_index(grid.shape, -60.0 * spacing), 0, 0};
  std::vector<fdtd::Probe> const probes{{Component::Ey, {node_index(grid.shape, 0.0), 0, 0}},
                                        {Component::Ey, {node_index(grid.shape, L), 0, 0}}};
  auto cfg = line_config(courant_factor);
  double const dt = fdtd::stability_dt(grid.shape, cfg);
  cfg.num_steps = int(std::ceil((src.turn_off_time() * 1.5 + (L + 100.0 * spacing) * index) / dt));
  auto const run = fdtd::run<double>(grid, cfg, std::span(&src, 1), probes);
  double const t1 = centroid_time(run.probes[0].values, dt), t2 = centroid_time(run.probes[1].values, dt);
  return L / (t2 - t1);
}

double phase_velocity_error(double cells_per_wavelength, double courant_factor)
{
  double const lambda = 637.0;
  double const h = lambda / cells_per_wavelength;
  int const periods = 10;
  double const L = periods * lambda;
  auto const grid = uniform_line(1.0, h, 60.0 * h, L + 60.0 * h);
  fdtd::Source src;
  src.wavelength = lambda;
  src.fractional_bandwidth = 0.2;
  src.position = {node_index(grid.shape, -30.0 * h), 0, 0};
  std::vector<fdtd::Probe> const probes{{Component::Ey, {node_index(grid.shape, 0.0), 0, 0}},
                                        {Component::Ey, {node_index(grid.shape, L), 0, 0}}};
  auto cfg = line_config(courant_factor);
  double const dt = fdtd::stability_dt(grid.shape, cfg);
  cfg.num_steps = int(std::ceil((src.turn_off_time() * 1.5 + L + 60.0 * h) / dt));
  auto const run = fdtd::run<double>(grid, cfg, std::span(&src, 1), probes);
  double const w = 2.0 * std::numbers::pi / lambda;
  cplx const ratio = dft_at(run.probes[1].values, dt, w) / dft_at(run.probes[0].values, dt, w);
  double const phase = 2.0 * std::numbers::pi * periods + std::arg(ratio);
  return 2.0 * std::numbers::pi * periods / phase - 1.0;
}

double absorber_reflection(fdtd::Absorbing const& layer)
{
  double const h = 10.0;
  fdtd::Source src;
  src.fractional_bandwidth = 0.3;
  auto cfg = line_config(0.5);
  cfg.boundaries[0] = fdtd::AxisBoundary::absorbing(layer);

  // Short line: absorber 100 cells past the probe. Reference: 6000 cells.
  auto const near = uniform_line(1.0, h, 100.0 * h, 300.0 * h);
  auto const far = uniform_line(1.0, h, 100.0 * h, 6000.0 * h);
  double const dt = fdtd::stability_dt(near.shape, cfg);
  cfg.num_steps = int(std::ceil((src.turn_off_time() + 800.0 * h) / dt));
  std::vector<double> rec[2];
  int g = 0;
  for (auto const* grid : {&near, &far}) {
    fdtd::Source s = src;
    s.position = {node_index(grid->shape, 0.0), 0, 0};
    std::vector<fdtd::Probe> const probes{{Component::Ey, {node_index(grid->shape, 200.0 * h), 0, 0}}};
    rec[g++] = fdtd::run<double>(*grid, cfg, std::span(&s, 1), probes).probes[0].values;
  }
  double inc = 0.0, refl = 0.0;
  for (std::size_t n = 0; n < rec[0].size(); ++n) {
    inc += rec[1][n] * rec[1][n];
    refl += (rec[0][n] - rec[1][n]) * (rec[0][n] - rec[1][n]);
  }
  return refl / inc;
}

double closed_box_drift(int steps)
{
  auto const grid = block_grid({24, 20, 16}, {0, 0, 0}, 10.0, {70, 50, 40}, {170, 130, 110}, 5.76);
  fdtd::SimulationConfig cfg; // conductor on every face
  fdtd::Solver<double> solver(grid, cfg);
  fdtd::Source src;
  src.wavelength = 150.0;
  src.fractional_bandwidth = 0.5;
  src.position = {9, 8, 6};
  solver.add_source(src);
  int const off = int(std::ceil(src.turn_off_time() / solver.dt())) + 1;
  for (int n = 0; n < off; ++n) solver.step();
  double const e0 = solver.leapfrog_energy();
  double drift = 0.0;
  for (int n = 1; n <= steps; ++n) {
    solver.step();
    if (n % 50 == 0 || n == steps) drift = std::max(drift, std::abs(solver.leapfrog_energy() - e0) / e0);
  }
  return drift;
}

bool stable_at_limit(int steps)
{
  auto const grid = block_grid({12, 12, 12}, {0, 0, 0}, 10.0, {0, 0, 0}, {0, 0, 0}, 1.0);
  fdtd::SimulationConfig cfg;
  cfg.courant_factor = 0.99;
  fdtd::Solver<double> solver(grid, cfg);
  fdtd::Source src;
  src.wavelength = 100.0;
  src.fractional_bandwidth = 1.0;
  src.position = {5, 6, 7};
  solver.add_source(src);
  try {
    for (int n = 0; n < steps; ++n) solver.step();
  } catch (fdtd::InstabilityError const&) {
    return false;
  }
  for (auto const& f : solver.state().components)
    if (!f.allFinite()) return false;
  return true;
}

SyntheticFit synthetic_inversion(double lambda, double Q, std::size_t samples, double dt)
{
  double const w = 2.0 * std::numbers::pi / lambda;
  double const decay = w / (2.0 * Q);
  std::vector<double> x(samples);
  for (std::size_t n = 0; n < samples; ++n) {
    double const t = double(n) * dt;
    x[n] = std::exp(-decay * t) * std::cos(w * t + 0.3);
  }
  auto const modes = spectra::harmonic_inversion(x, dt, {0, samples}, {0.9 * lambda, 1.1 * lambda});
  if (modes.empty()) return {0.0, 0.0, 1.0, 1.0};
  auto const& m = modes.front();
  return {m.wavelength, m.Q, std::abs(m.wavelength - lambda) / lambda, std::abs(m.Q - Q) / Q};
}

double bloch_tiling_mismatch(double phase_error)
{
  int const n = 12, steps = 300;
  auto sphere = [](double cx) {
    return [cx](double x, double y, double z) {
      return (x - cx) * (x - cx) + (y - 40) * (y - 40) + (z - 35) * (z - 35) < 30.0 * 30.0;
    };
  };
  GridShape one;
  one.cells = {n, 8, 8};
  one.spacing = {10, 10, 10};
  GridShape two = one;
  two.cells[0] = 2 * n;
  auto const a = rasterize_function(one, 4.0, sphere(50.0));
  auto const b = rasterize_function(two, 4.0, [&](double x, double y, double z) {
    return sphere(50.0)(x, y, z) || sphere(50.0 + n * 10.0)(x, y, z);
  });

  fdtd::SimulationConfig ca, cb;
  ca.boundaries[0] = fdtd::AxisBoundary::periodic(phase_error);
  cb.boundaries[0] = fdtd::AxisBoundary::periodic(0.0);
  ca.num_steps = cb.num_steps = steps;
  fdtd::Source src;
  src.wavelength = 300.0;
  src.fractional_bandwidth = 0.8;
  src.position = {3, 4, 3};
  fdtd::Source src2 = src;
  src2.position[0] += n;
  std::vector<fdtd::Source> sa{src}, sb{src, src2};

  fdtd::Solver<std::complex<double>> A(a, ca), B(b, cb);
  for (auto const& s : sa) A.add_source(s);
  for (auto const& s : sb) B.add_source(s);
  for (int k = 0; k < steps; ++k) {
    A.step();
    B.step();
  }
  double diff = 0.0, ref = 0.0;
  for (int c = 0; c < 6; ++c) {
    auto const comp = static_cast<Component>(c);
    for (int i = 0; i <= one.last_index(comp, 0); ++i)
      for (int j = 0; j <= one.last_index(comp, 1); ++j)
        for (int k = 0; k <= one.last_index(comp, 2); ++k) {
          auto const va = A.state()[comp][one.offset(i, j, k)];
          auto const vb = B.state()[comp][two.offset(i, j, k)];
          diff = std::max(diff, std::abs(va - vb));
          ref = std::max(ref, std::abs(vb));
        }
  }
  return diff / ref;
}

double mirror_mismatch()
{
  int const half = 16, steps = 400;
  double const h = 10.0;
  std::array<double, 3> const lo{-47.0, 23.0, 18.0}, hi{47.0, 81.0, 66.0};
  auto const full = block_grid({2 * half, 12, 10}, {-double(half), 0, 0}, h, lo, hi, 5.76);
  auto const part = block_grid({half, 12, 10}, {0, 0, 0}, h, lo, hi, 5.76);

  double worst = 0.0;
  for (auto parity : {fdtd::Parity::EvenE, fdtd::Parity::OddE}) {
    fdtd::SimulationConfig cf, cp;
    cf.boundaries[0] = fdtd::AxisBoundary::absorbing();
    cp.boundaries[0] = fdtd::AxisBoundary::mirrored(parity);
    cf.num_steps = cp.num_steps = steps;

    fdtd::Source s;
    s.wavelength = 400.0;
    s.fractional_bandwidth = 0.5;
    std::vector<fdtd::Source> sf, sp;
    if (parity == fdtd::Parity::EvenE) {
      s.position = {half, 5, 4};
      sf.push_back(s);
      s.position[0] = 0;
      sp.push_back(s);
    } else {
      // Antisymmetric pair about x = 0.
      s.position = {half + 1, 5, 4};
      sf.push_back(s);
      s.position[0] = 1;
      sp.push_back(s);
      s.position[0] = half - 1;
      s.amplitude = -1.0;
      sf.push_back(s);
    }
    std::vector<fdtd::Probe> pf, pp;
    for (int x : {0, 1, 2, 3}) {
      pf.push_back({Component::Ey, {half + x, 4, 3}});
      pp.push_back({Component::Ey, {x, 4, 3}});
      pf.push_back({Component::Ez, {half + x, 6, 2}});
      pp.push_back({Component::Ez, {x, 6, 2}});
    }
    auto const rf = fdtd::run<double>(full, cf, sf, pf);
    auto const rp = fdtd::run<double>(part, cp, sp, pp);
    double diff = 0.0, ref = 0.0;
    for (std::size_t p = 0; p < pf.size(); ++p) {
      for (std::size_t n = 0; n < rf.probes[p].values.size(); ++n) {
        diff = std::max(diff, std::abs(rf.probes[p].values[n] - rp.probes[p].values[n]));
      }
      ref = std::max(ref, max_abs(rf.probes[p].values));
    }
    worst = std::max(worst, diff / ref);
  }
  return worst;
}

double linearity_error()
{
  auto const grid = block_grid({40, 12, 10}, {0, 0, 0}, 10.0, {160, 40, 20}, {220, 80, 70}, 5.76);
  fdtd::SimulationConfig cfg;
  cfg.boundaries = {fdtd::AxisBoundary::absorbing(), fdtd::AxisBoundary::periodic(), fdtd::AxisBoundary::closed()};
  cfg.num_steps = 500;
  fdtd::Source s;
  s.wavelength = 400.0;
  s.position = {18, 5, 4};
  std::vector<fdtd::Probe> const probes{{Component::Ey, {21, 7, 5}}, {Component::Hz, {15, 3, 6}}};
  auto const r1 = fdtd::run<double>(grid, cfg, std::span(&s, 1), probes);
  s.amplitude = 2.0;
  auto const r2 = fdtd::run<double>(grid, cfg, std::span(&s, 1), probes);
  double diff = 0.0, ref = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    for (std::size_t n = 0; n < r1.probes[p].values.size(); ++n)
      diff = std::max(diff, std::abs(r2.probes[p].values[n] - 2.0 * r1.probes[p].values[n]));
    ref = std::max(ref, 2.0 * max_abs(r1.probes[p].values));
  }
  return diff / ref;
}

std::vector<CheckResult> run_suite(SuiteOptions const& opt)
{
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, std::move(detail)}); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };

  double const v0 = pulse_speed(1.0);
  add("vacuum_propagation", std::abs(v0 - 1.0) < 0.01, "speed/c = " + num(v0));
  double const v1 = pulse_speed(2.4);
  add("dielectric_propagation", std::abs(v1 * 2.4 - 1.0) < 0.01, "speed*n/c = " + num(v1 * 2.4));
  double const pv = phase_velocity_error();
  add("phase_velocity_20_cells", std::abs(pv) < 0.005, "relative error = " + num(pv));
  double const refl = absorber_reflection();
  add("absorber_reflection", refl < 1e-6, "reflected power = " + num(refl));

  auto const qw = compare_stack_spectrum(tmm::quarter_wave_stack(2.4, 1.0, 6, 637.0));
  add("tmm_quarter_wave_rt", qw.max_R_error < 0.02 && qw.max_T_error < 0.02,
      "max |dR| = " + num(qw.max_R_error) + ", max |dT| = " + num(qw.max_T_error));
  auto const dq = compare_stack_q(tmm::defect_stack(2.4, 1.0, 2, 637.0, 637.0 / 4.0), 600.0, 680.0);
  double const qerr = std::abs(dq.Q_fdtd - dq.Q_tmm) / dq.Q_tmm;
  double const lerr = std::abs(dq.lambda_fdtd - dq.lambda_tmm) / dq.lambda_tmm;
  add("tmm_defect_q", qerr < 0.1 && lerr < 1e-3,
      "Q " + num(dq.Q_fdtd) + " vs " + num(dq.Q_tmm) + ", lambda " + num(dq.lambda_fdtd) + " vs " + num(dq.lambda_tmm));

  double const drift = closed_box_drift();
  add("energy_conservation", drift < 1e-6, "relative drift = " + num(drift));
  add("stability_limit", stable_at_limit(), "1e5 steps at 0.99 of the limit");

  auto const h6 = synthetic_inversion(637.0, 1e6, 16384);
  add("harminv_q1e6", h6.Q_error < 0.05 && h6.lambda_error < 1e-3,
      "Q error = " + num(h6.Q_error) + ", lambda error = " + num(h6.lambda_error));
  auto const h5 = synthetic_inversion(637.0, 1e5, 8192);
  add("harminv_q1e5", h5.Q_error < 0.01, "Q error = " + num(h5.Q_error));

  double const bloch = bloch_tiling_mismatch(opt.bloch_phase_fault);
  add("bloch_wrap_consistency", bloch == 0.0, "max relative difference = " + num(bloch));
  double const mirror = mirror_mismatch();
  add("mirror_symmetry", mirror < 1e-10, "max relative difference = " + num(mirror));
  double const lin = linearity_error();
  add("linearity", lin < 1e-12, "max relative difference = " + num(lin));
  return out;
}

} // namespace nanobeam::validation

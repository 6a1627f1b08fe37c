#include "nanobeam/bands.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "nanobeam/io.hpp"

namespace nanobeam::bands {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Low-symmetry sample points as (x / period, y nm, z nm).
constexpr std::array<std::array<double, 3>, 3> kSources{{{0.31, 20.0, 15.0}, {-0.41, 70.0, 40.0}, {0.45, 110.0, 25.0}}};
constexpr std::array<std::array<double, 3>, 3> kProbes{{{-0.33, 30.0, 20.0}, {0.38, 90.0, 50.0}, {-0.19, 55.0, 10.0}}};
constexpr std::array<double, 3> kSourceAmplitude{1.0, 0.7, -0.55};

Index3 nearest_sample(GridShape const& s, Component c, double x, double y, double z)
{
  std::array<double, 3> const p{x, y, z};
  Index3 idx{};
  for (int a = 0; a < 3; ++a) {
    double const off = half_offset(c, a) ? 0.5 : 0.0;
    int const i = int(std::lround(p[a] / s.spacing[a] - s.origin[a] - off));
    idx[a] = std::clamp(i, 0, s.last_index(c, a));
  }
  return idx;
}

struct Cluster
{
  std::vector<double> f;
  double mean() const
  {
    double m = 0.0;
    for (double v : f) m += v;
    return m / double(f.size());
  }
};

KPoint solve_k(PermittivityGrid const& cell, double k, std::array<fdtd::AxisBoundary, 2> const& transverse,
               BandOptions const& opt)
{
  KPoint out{k, {}, false};
  double const period = cell.shape.cells[0] * cell.shape.spacing[0];
  double const f_light = k / period;
  if (opt.guided_only && !(f_light > 0.0)) return out; // nothing lies below the light line at k = 0

  // Without the light-line filter, the span is anchored at the folded vacuum line.
  double const f_anchor = f_light > 0.0 ? f_light : 0.5 / period;
  double const f_c = opt.center_fraction * f_anchor;

  fdtd::SimulationConfig cfg;
  cfg.courant_factor = opt.courant_factor;
  cfg.boundaries = {fdtd::AxisBoundary::periodic(kTwoPi * k), transverse[0], transverse[1]};

  std::vector<fdtd::Source> sources;
  for (std::size_t m = 0; m < kSources.size(); ++m) {
    fdtd::Source s;
    s.component = Component::Ey;
    s.wavelength = 1.0 / f_c;
    s.fractional_bandwidth = opt.fractional_bandwidth;
    s.amplitude = kSourceAmplitude[m];
    s.position = nearest_sample(cell.shape, Component::Ey, kSources[m][0] * period, kSources[m][1], kSources[m][2]);
    sources.push_back(s);
  }
  std::vector<fdtd::Probe> probes;
  for (auto const& p : kProbes) {
    probes.push_back({Component::Ey, nearest_sample(cell.shape, Component::Ey, p[0] * period, p[1], p[2])});
  }

  double const dt = fdtd::stability_dt(cell.shape, cfg);
  int const off = int(std::ceil(sources.front().turn_off_time() / dt));
  cfg.num_steps = off + opt.steps;
  auto const run = fdtd::run<cplx>(cell, cfg, sources, probes);

  double const span = 1.5 * opt.fractional_bandwidth;
  double f_lo = f_c * std::max(0.05, 1.0 - span);
  double f_hi = f_c * (1.0 + span);
  if (opt.guided_only) f_hi = std::min(f_hi, f_light);
  spectra::WavelengthBand const band{1.0 / f_hi, 1.0 / f_lo};

  spectra::HarminvOptions hopt;
  hopt.amplitude_floor = opt.amplitude_floor;
  std::vector<double> found;
  spectra::Window const win{std::size_t(run.source_off_step), run.probes.front().values.size()};
  for (auto const& rec : run.probes) {
    for (bool conj : {false, true}) {
      std::vector<cplx> v = rec.values;
      if (conj) {
        for (auto& x : v) x = std::conj(x);
      }
      for (auto const& m : spectra::harmonic_inversion(v, run.dt, win, band, hopt)) {
        if (m.Q >= opt.min_Q) found.push_back(m.omega / kTwoPi);
      }
    }
  }
  std::sort(found.begin(), found.end());

  // Group repeated detections of one mode across probes and time directions.
  std::vector<Cluster> clusters;
  for (double f : found) {
    if (!clusters.empty() && f - clusters.back().f.back() < 2e-3 * f) clusters.back().f.push_back(f);
    else clusters.push_back({{f}});
  }
  for (auto const& c : clusters) {
    if (c.f.size() < 2) continue; // seen once: not a robust mode
    out.frequency.push_back(c.mean());
    if (int(out.frequency.size()) == opt.bands) break;
  }
  out.complete = int(out.frequency.size()) == opt.bands;
  return out;
}

/// Fritsch-Carlson monotone cubic through (x_i, y_i), evaluated at t.
double pchip(std::vector<double> const& x, std::vector<double> const& y, double t)
{
  std::size_t const n = x.size();
  std::vector<double> h(n - 1), d(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      double const w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  std::size_t i = std::min<std::size_t>(n - 2, std::upper_bound(x.begin(), x.end(), t) - x.begin() - 1);
  double const s = (t - x[i]) / h[i];
  double const h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  double const h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * y[i] + h10 * h[i] * m[i] + h01 * y[i + 1] + h11 * h[i] * m[i + 1];
}

void sort_points(BandStructure& bs)
{
  std::sort(bs.points.begin(), bs.points.end(),
            [](KPoint const& a, KPoint const& b) { return a.k_fraction < b.k_fraction; });
}

} // namespace

bool BandStructure::complete() const
{
  return std::all_of(points.begin(), points.end(), [](KPoint const& p) { return p.complete; });
}

std::vector<double> default_k_fractions(int count)
{
  if (count < 2) throw std::invalid_argument("default_k_fractions: count must be >= 2");
  std::vector<double> k(count);
  for (int i = 0; i < count; ++i) k[i] = 0.5 * i / (count - 1);
  return k;
}

BandStructure band_diagram(PermittivityGrid const& cell, std::vector<double> const& k_fractions,
                           std::array<fdtd::AxisBoundary, 2> const& transverse, BandOptions const& opt)
{
  if (opt.bands < 1) throw std::invalid_argument("band_diagram: bands must be >= 1");
  for (std::size_t i = 0; i < k_fractions.size(); ++i) {
    double const k = k_fractions[i];
    if (!(k >= 0.0 && k <= 0.5)) throw std::invalid_argument("band_diagram: k fractions must lie in [0, 0.5]");
    if (i > 0 && !(k > k_fractions[i - 1])) throw std::invalid_argument("band_diagram: k fractions must increase");
  }
  BandStructure bs;
  bs.period = cell.shape.cells[0] * cell.shape.spacing[0];
  bs.spacing = cell.shape.spacing;
  bs.bands = opt.bands;
  for (double k : k_fractions) {
    try {
      bs.points.push_back(solve_k(cell, k, transverse, opt));
    } catch (fdtd::InstabilityError const& e) {
      throw fdtd::InstabilityError("band_diagram: k = " + format_double(k) + ": " + e.what(), e.step);
    } catch (std::exception const& e) {
      throw std::runtime_error("band_diagram: k = " + format_double(k) + ": " + e.what());
    }
  }
  return bs;
}

BandStructure mirror_bands(DeviceSpec const& spec, double spacing, BandOptions const& opt, RasterOptions const& raster)
{
  RasterOptions r = raster;
  r.mirrored = {false, true, true};
  auto const cell = mirror_unit_cell(spec, spacing, r);
  std::array<fdtd::AxisBoundary, 2> const transverse{fdtd::AxisBoundary::mirrored(fdtd::Parity::OddE),
                                                     fdtd::AxisBoundary::mirrored(fdtd::Parity::EvenE)};
  auto const ks = default_k_fractions(opt.k_points);
  BandStructure bs = band_diagram(cell, ks, transverse, opt);
  if (opt.bands < 2) return bs;

  // Refine around the band-1 maximum and the band-2 minimum.
  int i1 = -1, i2 = -1;
  for (int i = 0; i < int(bs.points.size()); ++i) {
    auto const& f = bs.points[i].frequency;
    if (f.size() >= 1 && (i1 < 0 || f[0] > bs.points[i1].frequency[0])) i1 = i;
    if (f.size() >= 2 && (i2 < 0 || f[1] < bs.points[i2].frequency[1])) i2 = i;
  }
  double const dk = ks[1] - ks[0];
  std::vector<double> extra;
  for (double frac : {0.5, 0.25, 0.75}) {
    for (int idx : {i1, i2}) {
      if (idx < 0) continue;
      for (double sign : {-1.0, 1.0}) {
        double const k = bs.points[idx].k_fraction + sign * frac * dk;
        if (k <= 0.0 || k >= 0.5 + 1e-12) continue;
        bool dup = std::any_of(bs.points.begin(), bs.points.end(),
                               [&](KPoint const& p) { return std::abs(p.k_fraction - k) < 1e-9; }) ||
                   std::any_of(extra.begin(), extra.end(), [&](double e) { return std::abs(e - k) < 1e-9; });
        if (!dup && extra.size() < 3) extra.push_back(k);
      }
    }
  }
  std::sort(extra.begin(), extra.end());
  if (!extra.empty()) {
    auto const more = band_diagram(cell, extra, transverse, opt);
    bs.points.insert(bs.points.end(), more.points.begin(), more.points.end());
    sort_points(bs);
  }
  return bs;
}

GapReport gap_metrics(BandStructure const& bands, double target_wavelength)
{
  GapReport g;
  g.target_wavelength = target_wavelength;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  int used = 0;
  for (auto const& p : bands.points) {
    if (p.frequency.size() < 2) g.complete = false;
    if (p.frequency.size() >= 1) lower = std::max(lower, p.frequency[0]);
    if (p.frequency.size() >= 2) {
      upper = std::min(upper, p.frequency[1]);
      ++used;
    }
  }
  g.k_points_used = used;
  if (!std::isfinite(lower) || !std::isfinite(upper)) {
    g.complete = false;
    return g;
  }
  g.lower = lower;
  g.upper = upper;
  g.midgap = 0.5 * (upper + lower);
  g.gap_to_midgap = (upper - lower) / g.midgap;
  g.midgap_wavelength = 1.0 / g.midgap;
  g.has_gap = upper > lower;
  double const f = 1.0 / target_wavelength;
  g.contains_target = g.has_gap && f > lower && f < upper;
  return g;
}

double bloch_index(double lambda, double a0)
{
  if (!(lambda > 0.0) || !(a0 > 0.0)) throw std::invalid_argument("bloch_index: lambda and a0 must be > 0");
  return lambda / (2.0 * a0);
}

double waveguide_neff(DeviceSpec const& spec, double lambda, double spacing, DispersionOptions const& opt,
                      RasterOptions const& raster)
{
  spec.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("waveguide_neff: lambda must be > 0");
  RasterOptions r = raster;
  r.mirrored = {false, true, true};
  auto const cell = waveguide_cell(spec, spacing, opt.cell_length, r);
  std::array<fdtd::AxisBoundary, 2> const transverse{fdtd::AxisBoundary::mirrored(fdtd::Parity::OddE),
                                                     fdtd::AxisBoundary::mirrored(fdtd::Parity::EvenE)};
  BandOptions bo = opt.band;
  bo.bands = 1;
  auto const bs = band_diagram(cell, opt.k_fractions, transverse, bo);

  std::vector<double> f, k;
  for (auto const& p : bs.points) {
    if (p.frequency.empty()) continue;
    if (!f.empty() && !(p.frequency[0] > f.back())) continue; // keep the monotone branch
    f.push_back(p.frequency[0]);
    k.push_back(p.k_fraction);
  }
  double const f0 = 1.0 / lambda;
  if (f.size() < 2 || f0 < f.front() || f0 > f.back()) {
    throw std::runtime_error("waveguide_neff: wavelength " + format_double(lambda) +
                             " nm lies outside the scanned dispersion range");
  }
  double const kf = pchip(f, k, f0);
  return kf / (bs.period * f0);
}

std::vector<MatchingRow> matching_report(DeviceSpec const& spec, double lambda, double n_wg)
{
  spec.validate();
  std::vector<MatchingRow> rows;
  auto add = [&](int seg, double a) {
    double const nb = bloch_index(lambda, a);
    rows.push_back({seg, a, nb, n_wg, nb - n_wg});
  };
  add(0, spec.mirror_period);
  auto const taper = taper_profile(spec.mirror_period, spec.taper_end_period, spec.taper_holes);
  for (std::size_t i = 0; i < taper.size(); ++i) add(int(i) + 1, taper[i]);
  return rows;
}

void write_bands_csv(std::ostream& os, BandStructure const& bands)
{
  os << "k_fraction,band_index,freq_c_per_nm,lambda_nm\n";
  for (auto const& p : bands.points) {
    for (int b = 0; b < bands.bands; ++b) {
      os << format_double(p.k_fraction) << ',' << b + 1 << ',';
      if (b < int(p.frequency.size())) {
        os << format_double(p.frequency[b]) << ',' << format_double(1.0 / p.frequency[b]) << '\n';
      } else {
        os << "nan,nan\n";
      }
    }
  }
}

void write_gap_report(std::ostream& os, GapReport const& g)
{
  os << "lower_edge_c_per_nm = " << format_double(g.lower) << '\n'
     << "upper_edge_c_per_nm = " << format_double(g.upper) << '\n'
     << "midgap_c_per_nm = " << format_double(g.midgap) << '\n'
     << "gap_to_midgap = " << format_double(g.gap_to_midgap) << '\n'
     << "midgap_lambda_nm = " << format_double(g.midgap_wavelength) << '\n'
     << "lower_edge_lambda_nm = " << format_double(g.lower > 0 ? 1.0 / g.lower : 0.0) << '\n'
     << "upper_edge_lambda_nm = " << format_double(g.upper > 0 ? 1.0 / g.upper : 0.0) << '\n'
     << "has_gap = " << (g.has_gap ? "true" : "false") << '\n'
     << "target_lambda_nm = " << format_double(g.target_wavelength) << '\n'
     << "target_in_gap = " << (g.contains_target ? "true" : "false") << '\n'
     << "complete = " << (g.complete ? "true" : "false") << '\n'
     << "k_points_with_two_bands = " << g.k_points_used << '\n';
}

} // namespace nanobeam::bands

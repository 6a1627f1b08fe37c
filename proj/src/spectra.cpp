#include "nanobeam/spectra.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nanobeam::spectra {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using MatrixXc = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXc = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

void check_window(std::size_t n, Window w, std::size_t min_len)
{
  if (w.size() == 0) throw std::invalid_argument("spectra: empty window");
  if (w.end > n) throw std::invalid_argument("spectra: window extends past the series");
  if (w.size() < min_len) {
    throw std::invalid_argument("spectra: window shorter than " + std::to_string(min_len) + " samples");
  }
}

// Causal moving average of length d, keeping only fully-covered outputs.
std::vector<cplx> boxcar(std::vector<cplx> const& in, std::size_t d)
{
  if (in.size() < d) return {};
  std::vector<cplx> out(in.size() - d + 1);
  double const inv = 1.0 / double(d);
  for (std::size_t m = 0; m < out.size(); ++m) {
    cplx acc = 0.0;
    for (std::size_t p = 0; p < d; ++p) acc += in[m + p];
    out[m] = acc * inv;
  }
  return out;
}

// Frequency response of one boxcar stage at complex rate s (per unit time).
cplx boxcar_response(cplx s, std::size_t d, double dt)
{
  cplx acc = 0.0;
  for (std::size_t p = 0; p < d; ++p) acc += std::exp(-s * double(p) * dt);
  return acc / double(d);
}

// Matrix-pencil poles of a uniformly sampled complex series.
VectorXc pencil_poles(std::vector<cplx> const& u, HarminvOptions const& opt)
{
  auto const n = Eigen::Index(u.size());
  Eigen::Index const L = std::max<Eigen::Index>(2, std::min<Eigen::Index>(n / 3, 300));
  Eigen::Index const rows = n - L;
  if (rows < 2) throw std::invalid_argument("harmonic_inversion: too few decimated samples");
  MatrixXc Y(rows, L + 1);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j <= L; ++j) Y(i, j) = u[std::size_t(i + j)];

  Eigen::BDCSVD<MatrixXc> svd(Y, Eigen::ComputeThinV);
  auto const& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv[0] > 0)) return {};
  Eigen::Index order = 0;
  while (order < sv.size() && sv[order] > opt.singular_threshold * sv[0]) ++order;
  order = std::min<Eigen::Index>({order, opt.max_order, L - 1});
  if (order == 0) return {};

  MatrixXc const V = svd.matrixV().leftCols(order);
  MatrixXc const V1 = V.topRows(L);
  MatrixXc const V2 = V.bottomRows(L);
  // A V1^H = V2^H in the least-squares sense; the poles are eig(A).
  MatrixXc const Ah = V1.colPivHouseholderQr().solve(V2);
  Eigen::ComplexEigenSolver<MatrixXc> es(Ah.adjoint());
  if (es.info() != Eigen::Success) throw std::runtime_error("harmonic_inversion: pencil eigen-solve failed");
  return es.eigenvalues();
}

// Least-squares amplitudes. Poles outside the unit circle are referenced to
// the last sample to keep the basis bounded.
VectorXc pencil_amplitudes(std::vector<cplx> const& u, VectorXc const& z, double max_condition)
{
  auto const n = Eigen::Index(u.size());
  auto const m = z.size();
  MatrixXc Z(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    bool const grows = std::abs(z[k]) > 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double const e = grows ? double(j - (n - 1)) : double(j);
      Z(j, k) = std::pow(z[k], e);
    }
  }
  Eigen::JacobiSVD<MatrixXc> check(Z);
  auto const& s = check.singularValues();
  double const cond = s[0] / s[s.size() - 1];
  if (!(cond < max_condition)) {
    throw std::runtime_error("harmonic_inversion: ill-conditioned fit (Vandermonde condition " +
                             std::to_string(cond) + ")");
  }
  VectorXc rhs(n);
  for (Eigen::Index j = 0; j < n; ++j) rhs[j] = u[std::size_t(j)];
  VectorXc a = Z.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (std::abs(z[k]) > 1.0) a[k] *= std::pow(z[k], -double(n - 1));
  }
  return a;
}

std::vector<Mode> invert(std::span<cplx const> x, bool real_input, double dt, Window window, WavelengthBand band,
                         HarminvOptions const& opt)
{
  check_window(x.size(), window, opt.min_window);
  if (!(dt > 0)) throw std::invalid_argument("harmonic_inversion: dt must be > 0");
  if (!(band.min_nm > 0 && band.max_nm > band.min_nm)) throw std::invalid_argument("harmonic_inversion: bad band");

  double const w_lo = kTwoPi / band.max_nm;
  double const w_hi = kTwoPi / band.min_nm;
  double const wc = 0.5 * (w_lo + w_hi);
  double const half_band = 0.5 * (w_hi - w_lo);
  std::size_t const N = window.size();
  int const stages = std::max(0, opt.boxcar_stages);

  std::vector<cplx> y(N);
  for (std::size_t n = 0; n < N; ++n) y[n] = x[window.start + n] * std::polar(1.0, -wc * double(n) * dt);

  // Decimated Nyquist must stay well clear of the band edge.
  auto const by_band = std::size_t(std::max(1.0, std::floor(std::numbers::pi / (4.0 * half_band * dt))));
  auto const by_length = std::max<std::size_t>(1, N / (opt.target_samples + std::size_t(stages) + 1));
  std::size_t const D = std::min(by_band, by_length);

  std::vector<cplx> filtered = y;
  std::size_t lead = 0; // sample index of filtered[0] in y
  if (D > 1) {
    for (int s = 0; s < stages; ++s) {
      filtered = boxcar(filtered, D);
      lead += D - 1;
    }
  }
  std::vector<cplx> u;
  for (std::size_t m = 0; m < filtered.size(); m += D) u.push_back(filtered[m]);
  if (u.size() < 8) throw std::invalid_argument("harmonic_inversion: window too short for the band");

  VectorXc const z = pencil_poles(u, opt);
  if (z.size() == 0) return {};
  VectorXc const a = pencil_amplitudes(u, z, opt.max_condition);

  double const step = double(D) * dt;
  std::vector<Mode> modes;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (z[k] == cplx(0.0)) continue;
    cplx const s = std::log(z[k]) / step; // -decay + i (omega - wc)
    double const omega = wc + s.imag();
    if (omega < w_lo || omega > w_hi) continue;
    cplx gain = std::exp(s * double(lead) * dt);
    if (D > 1) gain *= std::pow(boxcar_response(s, D, dt), stages);
    cplx const c = a[k] / gain;
    Mode mode;
    mode.omega = omega;
    mode.wavelength = kTwoPi / omega;
    mode.decay = -s.real();
    mode.Q = mode.decay == 0.0 ? std::numeric_limits<double>::infinity() : omega / (2.0 * std::abs(mode.decay));
    mode.amplitude = (real_input ? 2.0 : 1.0) * std::abs(c);
    mode.phase = std::arg(c);
    modes.push_back(mode);
  }
  if (modes.empty()) return modes;
  std::sort(modes.begin(), modes.end(), [](Mode const& l, Mode const& r) { return l.amplitude > r.amplitude; });
  double const floor = opt.amplitude_floor * modes.front().amplitude;
  std::erase_if(modes, [&](Mode const& m) { return m.amplitude < floor; });
  return modes;
}

} // namespace

std::vector<SpectrumPoint> dft_spectrum(std::span<double const> series, double dt, Window window)
{
  check_window(series.size(), window, 64);
  if (!(dt > 0)) throw std::invalid_argument("dft_spectrum: dt must be > 0");
  std::vector<double> in(series.begin() + std::ptrdiff_t(window.start), series.begin() + std::ptrdiff_t(window.end));
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.fwd(out, in);
  std::size_t const N = in.size();
  std::vector<SpectrumPoint> spectrum;
  spectrum.reserve(N / 2);
  for (std::size_t m = 1; m <= N / 2; ++m) {
    double const f = double(m) / (double(N) * dt);
    spectrum.push_back({f, 1.0 / f, std::norm(out[m])});
  }
  return spectrum;
}

double peak_wavelength(std::vector<SpectrumPoint> const& spectrum, WavelengthBand band)
{
  double best = -1.0, lambda = std::numeric_limits<double>::quiet_NaN();
  for (auto const& p : spectrum) {
    if (band.contains(p.wavelength) && p.power > best) {
      best = p.power;
      lambda = p.wavelength;
    }
  }
  return lambda;
}

std::vector<Mode> harmonic_inversion(std::span<double const> series, double dt, Window window, WavelengthBand band,
                                     HarminvOptions const& opt)
{
  std::vector<cplx> c(series.begin(), series.end());
  return invert(c, true, dt, window, band, opt);
}

std::vector<Mode> harmonic_inversion(std::span<cplx const> series, double dt, Window window, WavelengthBand band,
                                     HarminvOptions const& opt)
{
  return invert(series, false, dt, window, band, opt);
}

double q_from_decay(std::span<double const> energy, double dt, double lambda0)
{
  if (energy.size() < 2) throw std::invalid_argument("q_from_decay: need at least two samples");
  if (!(dt > 0) || !(lambda0 > 0)) throw std::invalid_argument("q_from_decay: dt and lambda0 must be > 0");
  double st = 0, sy = 0, stt = 0, sty = 0;
  auto const n = double(energy.size());
  for (std::size_t i = 0; i < energy.size(); ++i) {
    if (!(energy[i] > 0)) throw std::invalid_argument("q_from_decay: energy must be positive");
    double const t = double(i) * dt;
    double const y = std::log(energy[i]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  double const slope = (n * sty - st * sy) / (n * stt - st * st);
  if (!(slope < 0) || !(energy.back() < energy.front())) {
    throw std::invalid_argument("q_from_decay: energy series is not decaying");
  }
  return (kTwoPi / lambda0) / std::abs(slope);
}

namespace {

// Visits every cell center with its energy density eps |E|^2.
template <typename F>
void for_each_cell_density(ElectricField const& field, PermittivityGrid const& grid, F&& f)
{
  auto const& s = field.shape;
  for (int i = 0; i < s.cells[0]; ++i)
    for (int j = 0; j < s.cells[1]; ++j)
      for (int k = 0; k < s.cells[2]; ++k) {
        double u = 0.0;
        for (int c = 0; c < 3; ++c) {
          // The four samples of E_c around the cell center lie on the edges
          // parallel to axis c.
          int const b = (c + 1) % 3, d = (c + 2) % 3;
          double acc = 0.0;
          for (int db = 0; db < 2; ++db)
            for (int dd = 0; dd < 2; ++dd) {
              Index3 p{i, j, k};
              p[b] += db;
              p[d] += dd;
              auto const o = s.offset(p);
              double const e = field.E[c][o];
              acc += grid.eps[c][o] * e * e;
            }
          u += 0.25 * acc;
        }
        f(u);
      }
}

void check_field(ElectricField const& field, PermittivityGrid const& grid)
{
  if (field.shape.cells != grid.shape.cells) throw std::invalid_argument("mode_volume: grid and field shapes differ");
  for (auto const& e : field.E)
    if (std::size_t(e.size()) != field.shape.storage_size()) throw std::invalid_argument("mode_volume: bad field size");
}

} // namespace

double electric_energy(ElectricField const& field, PermittivityGrid const& grid)
{
  check_field(field, grid);
  double total = 0.0;
  for_each_cell_density(field, grid, [&](double u) { total += u; });
  return total * field.shape.cell_volume();
}

double mode_volume(ElectricField const& field, PermittivityGrid const& grid, double lambda, double index,
                   std::array<bool, 3> mirrored)
{
  check_field(field, grid);
  if (!(lambda > 0) || !(index > 0)) throw std::invalid_argument("mode_volume: lambda and index must be > 0");
  double total = 0.0, peak = 0.0;
  for_each_cell_density(field, grid, [&](double u) {
    total += u;
    peak = std::max(peak, u);
  });
  if (!(peak > 0)) throw std::invalid_argument("mode_volume: field snapshot is zero");
  double mult = 1.0;
  for (bool m : mirrored) mult *= m ? 2.0 : 1.0;
  double const v_phys = mult * total * field.shape.cell_volume() / peak;
  double const unit = lambda / index;
  return v_phys / (unit * unit * unit);
}

} // namespace nanobeam::spectra

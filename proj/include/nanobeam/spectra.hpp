#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nanobeam/geometry.hpp"

// Resonance extraction from probe time series and field snapshots.
// Units follow the solver: nm and nm / c, so f = 1 / lambda.

namespace nanobeam::spectra {

using cplx = std::complex<double>;

/// Half-open sample range [start, end).
struct Window
{
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t size() const { return end > start ? end - start : 0; }
};

struct WavelengthBand
{
  double min_nm = 600.0;
  double max_nm = 680.0;
  bool contains(double lambda) const { return lambda >= min_nm && lambda <= max_nm; }
};

struct SpectrumPoint
{
  double frequency;  // cycles per (nm / c)
  double wavelength; // nm
  double power;
};

/// |DFT|^2 of the windowed series at the positive bins m = 1..N/2.
std::vector<SpectrumPoint> dft_spectrum(std::span<double const> series, double dt, Window window);

/// Wavelength of the strongest bin inside `band`; NaN when the band holds no bin.
double peak_wavelength(std::vector<SpectrumPoint> const& spectrum, WavelengthBand band);

struct Mode
{
  double wavelength; // 2 pi c / Re(omega)
  double omega;      // Re(omega)
  double decay;      // -Im(omega), field amplitude decay rate
  double Q;          // Re(omega) / (2 |Im(omega)|)
  double amplitude;  // envelope amplitude at the window start
  double phase;      // radians at the window start
};

struct HarminvOptions
{
  double singular_threshold = 1e-8; // relative to the largest singular value
  double amplitude_floor = 1e-4;    // relative to the strongest in-band mode
  int max_order = 40;
  std::size_t min_window = 512;
  int boxcar_stages = 6;
  std::size_t target_samples = 600; // decimated series length aimed for
  double max_condition = 1e13;
};

/// Fit the windowed series as a sum of damped exponentials (matrix pencil on
/// a downconverted, boxcar-decimated copy) and return the modes inside
/// `band`, strongest first.
std::vector<Mode> harmonic_inversion(std::span<double const> series, double dt, Window window, WavelengthBand band,
                                     HarminvOptions const& opt = {});
std::vector<Mode> harmonic_inversion(std::span<cplx const> series, double dt, Window window, WavelengthBand band,
                                     HarminvOptions const& opt = {});

/// Q from the slope of log(energy) vs time: Q = omega0 / |slope|.
double q_from_decay(std::span<double const> energy, double dt, double lambda0);

/// E-field triple in solver storage layout.
struct ElectricField
{
  GridShape shape;
  std::array<Eigen::ArrayXd, 3> E;
};

/// sum(eps |E|^2) dV / max(eps |E|^2), in units of (lambda / n)^3. Energy
/// density is evaluated at cell centers from the four surrounding samples of
/// each component. `mirrored` marks axes stored as one half of a symmetric
/// domain; each such axis doubles the integral.
double mode_volume(ElectricField const& field, PermittivityGrid const& grid, double lambda, double index,
                   std::array<bool, 3> mirrored = {false, false, false});

/// Total electric energy sum(eps |E|^2) dV over the stored samples.
double electric_energy(ElectricField const& field, PermittivityGrid const& grid);

struct ResonanceResult
{
  double gap_s = 0.0;
  double wavelength = 0.0;
  double Q = 0.0;
  double V = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  std::size_t window_start = 0;
  std::size_t window_end = 0;
};

} // namespace nanobeam::spectra

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nanobeam/fdtd.hpp"
#include "nanobeam/geometry.hpp"
#include "nanobeam/spectra.hpp"

// Single nanobeam cavity simulation: ring-down, mode extraction, mode volume.

namespace nanobeam::cavity {

struct CavityOptions
{
  RasterOptions raster{10.0, {300.0, 300.0, 300.0}, 12, {true, true, true}, 4};
  bool symmetric = true;          // octant with mirror planes, or the full beam
  double courant_factor = 0.5;
  fdtd::Absorbing absorbing{};
  double source_wavelength = 637.0;
  double fractional_bandwidth = 0.1;
  int window_steps = 6000;        // harmonic-inversion window after source turn-off
  spectra::WavelengthBand band{600.0, 680.0};
  spectra::HarminvOptions harminv{};
  int projection_periods = 24;    // mode-field projection length after the window
  int samples_per_period = 8;
};

struct Slice
{
  Index3 dims{};                  // (nx, ny, 1), x slowest
  std::array<double, 3> spacing{};
  std::vector<double> values;     // E_y on the z = 0 plane, both halves
  int step = 0;
};

struct CavityResult
{
  spectra::ResonanceResult resonance;
  std::vector<spectra::Mode> modes;   // everything found in band, strongest first
  Slice midplane;
  double dt = 0.0;
  int steps = 0;
};

/// No mode inside the analysis band. Carries the probe spectrum for diagnosis.
struct NoModeError : std::runtime_error
{
  NoModeError(std::string const& what, std::vector<spectra::SpectrumPoint> spectrum)
      : std::runtime_error(what), spectrum(std::move(spectrum))
  {
  }
  std::vector<spectra::SpectrumPoint> spectrum;
};

/// Progress callback: (steps done, steps planned).
using Progress = std::function<void(int, int)>;

CavityResult resonate(DeviceSpec const& spec, CavityOptions const& opt, Progress const& progress = {});

/// Same pipeline on an arbitrary ordered hole list.
CavityResult resonate_holes(HoleList const& holes, DeviceSpec const& spec, CavityOptions const& opt,
                            Progress const& progress = {});

/// Untapered reference: all periods a0, the same number of holes per side as
/// the tapered device, innermost pair separated by an edge gap s.
HoleList untapered_holes(DeviceSpec const& spec);

} // namespace nanobeam::cavity

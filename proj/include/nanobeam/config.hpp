#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nanobeam/bands.hpp"
#include "nanobeam/cavity.hpp"
#include "nanobeam/geometry.hpp"

// Run configuration: named [blocks] of `key = value` lines, '#' comments.
// Unknown blocks or keys are errors; absent keys keep their defaults.

namespace nanobeam {

struct GridSettings
{
  double spacing = 10.0;
  std::array<double, 3> padding{300.0, 300.0, 300.0};
  bool symmetry = true;
  int subsamples = 4;
};

struct SolverSettings
{
  double courant_factor = 0.9;
  int absorbing_layers = 12;
  double grading_order = 3.0;
  double target_reflection = 1e-8;
  double cfs_alpha = 1e-3;
  int window_steps = 6000;
  double source_wavelength = 637.0;
  double source_bandwidth = 0.1;
};

struct AnalysisSettings
{
  double band_min = 600.0;
  double band_max = 680.0;
  int projection_periods = 24;
  int samples_per_period = 8;
  bool write_slice = true;
};

struct BandSettings
{
  int k_points = 11;
  int num_bands = 2;
  int steps = 6000;
  double courant_factor = 0.5;
  double source_bandwidth = 0.3;
  double target_wavelength = 637.0;
  double neff_cell_length = 100.0;
};

struct SweepSettings
{
  std::vector<double> s_values{70.0, 75.0, 80.0, 85.0, 90.0, 95.0};
};

struct RunConfig
{
  DeviceSpec device{150.0, 264.0, 2.4, 225.0, 179.0, 0.28, 15, 5, 82.0};
  GridSettings grid;
  SolverSettings solver;
  AnalysisSettings analysis;
  BandSettings bands;
  SweepSettings sweep;
  std::string output = "out";

  void validate() const;
  cavity::CavityOptions cavity_options() const;
  bands::BandOptions band_options() const;
  RasterOptions raster_options() const;

  friend bool operator==(RunConfig const&, RunConfig const&);
};

/// Throws std::invalid_argument naming the offending line.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(std::string const& text);
RunConfig load_config(std::string const& path);

/// Canonical text: every key, fixed order, round-trip number formatting.
std::string serialize_config(RunConfig const& cfg);

} // namespace nanobeam

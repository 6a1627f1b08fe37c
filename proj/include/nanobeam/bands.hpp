#pragma once

#include <iosfwd>
#include <vector>

#include "nanobeam/fdtd.hpp"
#include "nanobeam/geometry.hpp"
#include "nanobeam/spectra.hpp"

// Bloch band structure of x-periodic cells from complex-field time stepping.
// Frequencies are in cycles per nm (f = 1 / lambda).

namespace nanobeam::bands {

struct BandOptions
{
  int bands = 2;
  int steps = 6000;               // steps after the sources turn off
  double courant_factor = 0.5;
  double fractional_bandwidth = 0.3;
  /// Keep only modes below the light line f < k / a (guided modes). Needed
  /// whenever the transverse boundaries absorb.
  bool guided_only = true;
  /// Source center as a fraction of the light-line frequency at each k.
  double center_fraction = 0.7;
  double min_Q = 200.0;           // reject strongly radiating fits
  double amplitude_floor = 0.05;  // relative to the strongest mode of each probe series
  int k_points = 11;              // uniform samples of [0, 0.5] for mirror_bands
};

struct KPoint
{
  double k_fraction;              // of 2 pi / a
  std::vector<double> frequency;  // ascending, up to `bands` entries
  bool complete = false;          // all requested bands found
};

struct BandStructure
{
  double period = 0.0;            // nm
  std::array<double, 3> spacing{};
  int bands = 0;
  std::vector<KPoint> points;     // strictly increasing k

  bool complete() const;
};

/// Run one complex-field simulation per k with Bloch phase 2 pi k and
/// return the lowest `bands` frequencies at each k. `boundaries` gives the
/// y and z treatment (x is always periodic).
BandStructure band_diagram(PermittivityGrid const& cell, std::vector<double> const& k_fractions,
                           std::array<fdtd::AxisBoundary, 2> const& transverse, BandOptions const& opt = {});

/// Default mirror-cell band study: `opt.k_points` uniform k in [0, 0.5] plus up
/// to three points refining the band-1 maximum and band-2 minimum.
BandStructure mirror_bands(DeviceSpec const& spec, double spacing, BandOptions const& opt = {},
                           RasterOptions const& raster = {});

/// `count` uniform samples of [0, 0.5].
std::vector<double> default_k_fractions(int count = 11);

struct GapReport
{
  double lower = 0.0;       // max of band 1
  double upper = 0.0;       // min of band 2
  double midgap = 0.0;
  double gap_to_midgap = 0.0;
  double midgap_wavelength = 0.0;
  double target_wavelength = 0.0;
  bool has_gap = false;     // upper > lower
  bool contains_target = false; // target wavelength inside the gap
  int k_points_used = 0;    // k-points contributing each edge must carry that band
  bool complete = true;     // every k carried both bands
};

/// Gap between bands 1 and 2. Band 1 maxima and band 2 minima are taken over
/// the k-points that carry the respective band.
GapReport gap_metrics(BandStructure const& bands, double target_wavelength = 637.0);

double bloch_index(double lambda, double a0);

struct DispersionOptions
{
  double cell_length = 100.0; // nm, hole-free periodic segment
  std::vector<double> k_fractions{0.16, 0.20, 0.24, 0.28, 0.32, 0.36, 0.40};
  BandOptions band{};
};

/// Fundamental TE-like guided-mode index of the unpatterned beam at lambda.
double waveguide_neff(DeviceSpec const& spec, double lambda, double spacing, DispersionOptions const& opt = {},
                      RasterOptions const& raster = {});

struct MatchingRow
{
  int segment;      // 0 = mirror, k = taper hole k
  double period;
  double n_bloch;
  double n_wg;
  double mismatch;  // n_bloch - n_wg
};

std::vector<MatchingRow> matching_report(DeviceSpec const& spec, double lambda, double n_wg);

/// k_fraction,band_index,freq_c_per_nm,lambda_nm; one row per (k, band),
/// missing bands written as nan.
void write_bands_csv(std::ostream& os, BandStructure const& bands);
void write_gap_report(std::ostream& os, GapReport const& gap);

} // namespace nanobeam::bands

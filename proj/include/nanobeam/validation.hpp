#pragma once

#include <string>
#include <vector>

#include "nanobeam/fdtd.hpp"
#include "nanobeam/spectra.hpp"
#include "nanobeam/tmm.hpp"

// Solver cross-checks against analytic references.

namespace nanobeam::validation {

struct StackSpectrumOptions
{
  double spacing = 2.0;           // nm
  double courant_factor = 0.99;
  double lambda0 = 637.0;
  double fractional_bandwidth = 0.6;
  double band_min = 470.0;        // comparison band, nm; spans the lower stop-band edge
  double band_max = 820.0;
  int samples = 71;               // wavelengths compared
  double lead = 800.0;            // ambient before the stack, nm
  double trail = 400.0;
};

struct SpectrumComparison
{
  std::vector<double> wavelength;
  std::vector<double> R_fdtd, T_fdtd, R_tmm, T_tmm;
  double max_R_error = 0.0; // max |R_fdtd - R_tmm|
  double max_T_error = 0.0;
};

/// Plane-wave R(lambda), T(lambda) of a stack from two 1D runs (reference
/// and structure) against the transfer-matrix result.
SpectrumComparison compare_stack_spectrum(tmm::LayerStack const& stack, StackSpectrumOptions const& opt = {});

struct StackQComparison
{
  double lambda_tmm, Q_tmm;
  double lambda_fdtd, Q_fdtd;
};

/// Ring-down of a defect stack excited inside its spacer, inverted for the
/// in-gap mode, against stack_resonance.
StackQComparison compare_stack_q(tmm::LayerStack const& stack, double lambda_min, double lambda_max,
                                 double spacing = 2.0, int steps = 40000);

/// Pulse group speed from the energy centroids at two probes `distance`
/// cells apart on a 1D line filled with index n.
double pulse_speed(double index, double spacing = 10.0, int distance = 1000, double courant_factor = 0.5);

/// Phase speed / c - 1 at `cells_per_wavelength` resolution in vacuum.
double phase_velocity_error(double cells_per_wavelength = 20.0, double courant_factor = 0.5);

/// Reflected / incident power of a normally incident pulse on the default
/// absorbing layer.
double absorber_reflection(fdtd::Absorbing const& layer = {});

/// max |E(n) - E(n0)| / E(n0) of the leapfrog invariant over `steps` after
/// the source turns off, in a closed box holding a dielectric block.
double closed_box_drift(int steps = 10000);

/// Steps `steps` of a vacuum box at 0.99 of the stability limit; true if the
/// fields stay finite and bounded.
bool stable_at_limit(int steps = 100000);

struct SyntheticFit
{
  double lambda, Q;          // fitted
  double lambda_error;       // relative
  double Q_error;            // relative
};

/// Single damped sinusoid e^{-omega t / 2Q} cos(omega t + phi) sampled with
/// step dt, inverted over all samples.
SyntheticFit synthetic_inversion(double lambda, double Q, std::size_t samples, double dt = 2.8867513459481287);

/// Largest |a - b| / max|b| between a periodic cell with Bloch phase
/// `phase_error` (nominally 0) and two tiled copies of it. Zero when the
/// wrap is consistent.
double bloch_tiling_mismatch(double phase_error = 0.0);

/// Largest relative probe difference between a full-domain run of an
/// x-symmetric structure and the half domain with a mirror at x = 0, for
/// both parities.
double mirror_mismatch();

/// max |run(2 s) - 2 run(s)| / max |2 run(s)|.
double linearity_error();

struct CheckResult
{
  std::string name;
  bool passed;
  std::string detail;
};

struct SuiteOptions
{
  /// Fault injection: Bloch phase offset applied in the periodic-wrap check.
  double bloch_phase_fault = 0.0;
};

/// The full oracle suite, one entry per named check.
std::vector<CheckResult> run_suite(SuiteOptions const& opt = {});

} // namespace nanobeam::validation

#pragma once

#include <vector>

#include "nanobeam/geometry.hpp"

// Normal-incidence transfer-matrix optics for lossless 1D layer stacks.

namespace nanobeam::tmm {

struct Layer
{
  double index;
  double thickness; // nm
};

struct LayerStack
{
  double ambient_left = 1.0;
  double ambient_right = 1.0;
  std::vector<Layer> layers;

  double total_thickness() const;
  LayerStack reversed() const;
  void validate() const;
};

struct RT
{
  double R;
  double T;
};

/// Power reflectance and transmittance for a wave incident from the left.
RT stack_rt(LayerStack const& stack, double lambda);

struct StackResonance
{
  double wavelength;
  double Q;
  double fwhm;
  double peak_transmission;
};

/// Isolated transmission peak in [lambda_min, lambda_max]: golden-section
/// search for the maximum, Lorentzian fit over the half-maximum span.
StackResonance stack_resonance(LayerStack const& stack, double lambda_min, double lambda_max);

/// `pairs` repetitions of (high, low) quarter-wave layers at `lambda0`.
LayerStack quarter_wave_stack(double n_high, double n_low, int pairs, double lambda0);

/// (H L)^N H  S  H (L H)^N with S a low-index layer of one quarter wave plus
/// `extra` nm. extra = lambda0 / (4 n_low) makes a half-wave spacer resonant
/// at lambda0, extra = 0 leaves a perfect periodic stack.
LayerStack defect_stack(double n_high, double n_low, int pairs_per_side, double lambda0, double extra);

/// Place a stack on a 1D grid along x with `lead` nm of left-ambient
/// material before it and `trail` nm of right ambient after it, plus
/// `boundary_cells` for absorbers on both ends. y and z are one cell wide.
/// Layer edges falling inside a cell are averaged (E lies in the layer plane).
PermittivityGrid rasterize_stack(LayerStack const& stack, double spacing, double lead, double trail,
                                 int boundary_cells = 12);

} // namespace nanobeam::tmm

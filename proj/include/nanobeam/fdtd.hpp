#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nanobeam/geometry.hpp"

// Time-domain Maxwell solver on a staggered (Yee) grid.
//
// Units: lengths in nm, c = eps0 = mu0 = 1, so time is measured in nm / c and
// a vacuum wavelength lambda corresponds to the angular frequency 2 pi / lambda.

namespace nanobeam::fdtd {

/// Mirror-plane parity, stated for the electric field tangential to the plane.
/// EvenE is a magnetic wall (tangential H = 0), OddE an electric wall.
enum class Parity { EvenE, OddE };

struct Absorbing
{
  int layers = 12;
  double grading_order = 3.0;
  double target_reflection = 1e-8;
  double cfs_alpha = 1e-3; // complex-frequency-shift alpha at the inner edge, 1/nm
};

struct Face
{
  enum class Kind { Conductor, Absorbing, Periodic, Mirror };

  Kind kind = Kind::Conductor;
  Absorbing absorbing{};
  double bloch_phase = 0.0; // radians per period, periodic faces only
  Parity parity = Parity::EvenE;

  static Face conductor() { return {}; }
  static Face absorber(Absorbing a = {}) { return {Kind::Absorbing, a, 0.0, Parity::EvenE}; }
  static Face mirror(Parity p) { return {Kind::Mirror, {}, 0.0, p}; }
};

struct AxisBoundary
{
  Face low{}, high{};

  static AxisBoundary periodic(double bloch_phase = 0.0)
  {
    Face f{Face::Kind::Periodic, {}, bloch_phase, Parity::EvenE};
    return {f, f};
  }
  static AxisBoundary absorbing(Absorbing a = {}) { return {Face::absorber(a), Face::absorber(a)}; }
  static AxisBoundary closed() { return {}; }
  /// Mirror plane at node 0, absorbing layers on the far side.
  static AxisBoundary mirrored(Parity p, Absorbing a = {}) { return {Face::mirror(p), Face::absorber(a)}; }

  bool is_periodic() const { return low.kind == Face::Kind::Periodic; }
};

struct SimulationConfig
{
  double courant_factor = 0.5;
  int num_steps = 0;
  std::array<AxisBoundary, 3> boundaries{};
  std::vector<int> snapshot_steps;

  void validate(GridShape const& shape) const;
};

/// dt = courant_factor * spacing / (c sqrt(dims)).
double stability_dt(double spacing, int dims, double courant_factor);

/// Time step for an actual grid: axes that are periodic, one cell long and
/// phase-free carry no spatial variation and do not count toward the limit.
double stability_dt(GridShape const& shape, SimulationConfig const& cfg);

/// Point dipole with a Gaussian-modulated sinusoid current. The envelope is
/// truncated `envelope_widths` standard deviations after its peak.
struct Source
{
  Component component = Component::Ey;
  Index3 position{};
  double wavelength = 637.0;
  double fractional_bandwidth = 0.1;
  double amplitude = 1.0;
  double envelope_widths = 5.0;

  double sigma_t() const;
  double peak_time() const { return envelope_widths * sigma_t(); }
  double turn_off_time() const { return 2.0 * envelope_widths * sigma_t(); }
  double value(double t) const;

  void validate() const;
};

struct Probe
{
  Component component = Component::Ey;
  Index3 position{};
};

template <typename Scalar>
struct ProbeRecord
{
  Probe probe;
  double dt = 0.0;
  std::vector<Scalar> values; // values[n] is sampled at time (n + 1) dt (E) or (n + 1/2) dt (H)
};

template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct FieldState
{
  GridShape shape;
  std::array<Field<Scalar>, 6> components;

  explicit FieldState(GridShape const& s = {});

  Field<Scalar>& operator[](Component c) { return components[static_cast<int>(c)]; }
  Field<Scalar> const& operator[](Component c) const { return components[static_cast<int>(c)]; }
  Scalar at(Component c, Index3 const& p) const { return (*this)[c][shape.offset(p)]; }

  FieldState& operator*=(double s);
};

/// 1/2 sum(eps |E|^2 + |H|^2) dV over physical samples, E at step n and H at
/// step n + 1/2 as stored.
template <typename Scalar>
double total_energy(FieldState<Scalar> const& state, PermittivityGrid const& grid);

/// Electric-field copy taken during a run.
template <typename Scalar>
struct Snapshot
{
  int step = 0;
  double time = 0.0;
  GridShape shape;
  std::array<Field<Scalar>, 3> E;
};

struct InstabilityError : std::runtime_error
{
  InstabilityError(std::string const& what, int step) : std::runtime_error(what), step(step) {}
  int step;
};

template <typename Scalar>
class Solver
{
public:
  using Real = typename Eigen::NumTraits<Scalar>::Real;

  Solver(PermittivityGrid const& grid, SimulationConfig const& cfg);

  void add_source(Source const& src);

  /// Advance H by one step, then E.
  void step();

  int steps_taken() const { return step_; }
  double dt() const { return dt_; }
  /// Time of the stored E field.
  double time() const { return step_ * dt_; }
  double source_turn_off_time() const;

  FieldState<Scalar> const& state() const { return state_; }
  FieldState<Scalar>& mutable_state() { return state_; }
  GridShape const& shape() const { return shape_; }
  Scalar sample(Probe const& p) const { return state_.at(p.component, p.position); }

  /// Leapfrog invariant 1/2 sum(eps |E^n|^2 + Re H^{n-1/2} conj(H^{n+1/2})) dV, with E^n and
  /// H^{n-1/2} as stored and H^{n+1/2} formed from the curl of E^n.
  /// Exactly conserved in a closed lossless box once sources are off.
  /// Absorbing regions are excluded when `interior_only` is set.
  double leapfrog_energy(bool interior_only = false) const;

  /// Electric-field copy in storage layout.
  Snapshot<Scalar> snapshot() const;

  /// True if the sample lies inside any absorbing layer.
  bool in_absorber(Component c, Index3 const& p) const;

private:
  // One convolutional-PML auxiliary term: psi = b psi + c d_axis(source).
  struct PmlTerm
  {
    Component target;
    Component source;
    int axis;
    double sign;    // +1 for the first curl term, -1 for the second
    Index3 lo, hi;  // inclusive index range of the target inside the layer
    std::vector<Real> b, c; // indexed by position along axis - lo[axis]
    Field<Scalar> psi;
  };

  void update_h();
  void update_e();
  void fill_h_ghosts();
  void enforce_e_boundaries();
  void apply_pml(bool electric);
  void check_stability();
  void build_pml();

  GridShape shape_;
  SimulationConfig cfg_;
  double dt_ = 0.0;
  std::array<Field<Real>, 3> inv_eps_;
  FieldState<Scalar> state_;
  std::vector<Source> sources_;
  std::vector<PmlTerm> pml_;
  std::array<Scalar, 3> phase_{};
  double max_source_amplitude_ = 0.0;
  int step_ = 0;
};

template <typename Scalar>
struct RunResult
{
  std::vector<ProbeRecord<Scalar>> probes;
  std::vector<Snapshot<Scalar>> snapshots;
  double dt = 0.0;
  int source_off_step = 0; // first probe sample recorded without source drive
};

/// Called at every scheduled snapshot step. When given, snapshots are not
/// stored in the result.
template <typename Scalar>
using SnapshotObserver = std::function<void(Solver<Scalar> const&)>;

template <typename Scalar>
RunResult<Scalar> run(PermittivityGrid const& grid, SimulationConfig const& cfg, std::span<Source const> sources,
                      std::span<Probe const> probes, SnapshotObserver<Scalar> const& observer = {});

/// Field snapshot export: flat little-endian float64 values over the physical
/// samples (x slowest, z fastest) in `<prefix>.bin`, and a key = value sidecar
/// in `<prefix>.txt`.
void write_snapshot(std::string const& prefix, Snapshot<double> const& snap, Component c);

/// Write an arbitrary flat sample block (x slowest) plus sidecar.
void write_raw_block(std::string const& prefix, std::vector<double> const& values, Index3 const& dims,
                     std::array<double, 3> const& spacing, std::string const& component, int step);

void write_probe_csv(std::ostream& os, ProbeRecord<double> const& rec);

extern template class Solver<float>;
extern template class Solver<double>;
extern template class Solver<std::complex<double>>;

} // namespace nanobeam::fdtd

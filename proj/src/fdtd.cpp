#include "nanobeam/fdtd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nanobeam/io.hpp"

namespace nanobeam::fdtd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename Scalar>
constexpr bool is_complex_v = Eigen::NumTraits<Scalar>::IsComplex;

template <typename Scalar>
double abs2(Scalar v)
{
  return double(std::norm(v));
}

template <typename Scalar>
Scalar conj_of(Scalar v)
{
  if constexpr (!is_complex_v<Scalar>) return v;
  else return std::conj(v);
}

template <typename Scalar>
double real_dot(Scalar a, Scalar b)
{
  if constexpr (!is_complex_v<Scalar>) return double(a) * double(b);
  else return double(std::real(a * std::conj(b)));
}

template <typename Scalar>
Scalar bloch_factor(double phase)
{
  if constexpr (!is_complex_v<Scalar>) {
    double const c = std::cos(phase);
    if (std::abs(std::sin(phase)) > 1e-12) {
      throw std::invalid_argument("real-valued fields need a Bloch phase of 0 or pi; use complex fields");
    }
    return Scalar(c > 0 ? 1 : -1);
  } else {
    return Scalar(std::polar(1.0, phase));
  }
}

Component e_comp(int a) { return static_cast<Component>(a); }
Component h_comp(int a) { return static_cast<Component>(3 + a); }

// Calls f(offset) for every physical sample of `c` on the plane index `at`
// along `axis`. Ghost samples (index -1) are allowed for `at`.
template <typename F>
void for_plane(GridShape const& s, Component c, int axis, int at, F&& f)
{
  int const b = (axis + 1) % 3;
  int const d = (axis + 2) % 3;
  Index3 p{};
  p[axis] = at;
  for (int u = 0; u <= s.last_index(c, b); ++u) {
    p[b] = u;
    for (int v = 0; v <= s.last_index(c, d); ++v) {
      p[d] = v;
      f(s.offset(p));
    }
  }
}

} // namespace

void SimulationConfig::validate(GridShape const& shape) const
{
  if (!(courant_factor > 0 && courant_factor <= 0.99)) {
    throw std::invalid_argument("SimulationConfig: courant_factor must lie in (0, 0.99]");
  }
  if (num_steps < 0) throw std::invalid_argument("SimulationConfig: num_steps must be >= 0");
  for (int a = 0; a < 3; ++a) {
    auto const& bnd = boundaries[a];
    if ((bnd.low.kind == Face::Kind::Periodic) != (bnd.high.kind == Face::Kind::Periodic)) {
      throw std::invalid_argument("SimulationConfig: periodic boundaries must be set on both faces");
    }
    if (bnd.high.kind == Face::Kind::Mirror) {
      throw std::invalid_argument("SimulationConfig: mirror planes are supported on the low face only");
    }
    int layers = 0;
    for (Face const* f : {&bnd.low, &bnd.high}) {
      if (f->kind == Face::Kind::Absorbing) {
        if (f->absorbing.layers < 8) throw std::invalid_argument("SimulationConfig: absorbing layers must be >= 8");
        if (!(f->absorbing.target_reflection > 0 && f->absorbing.target_reflection < 1)) {
          throw std::invalid_argument("SimulationConfig: target_reflection must lie in (0, 1)");
        }
        layers += f->absorbing.layers;
      }
    }
    if (layers >= shape.cells[a]) throw std::invalid_argument("SimulationConfig: absorbing layers fill the grid");
  }
}

double stability_dt(double spacing, int dims, double courant_factor)
{
  if (!(spacing > 0)) throw std::invalid_argument("stability_dt: spacing must be > 0");
  if (dims < 1 || dims > 3) throw std::invalid_argument("stability_dt: dims must be 1, 2 or 3");
  if (!(courant_factor > 0 && courant_factor < 1)) {
    throw std::invalid_argument("stability_dt: courant_factor must lie in (0, 1)");
  }
  return courant_factor * spacing / std::sqrt(double(dims));
}

double stability_dt(GridShape const& shape, SimulationConfig const& cfg)
{
  double inv2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    auto const& b = cfg.boundaries[a];
    bool const flat = shape.cells[a] == 1 && b.is_periodic() && std::cos(b.low.bloch_phase) == 1.0;
    if (!flat) inv2 += 1.0 / (shape.spacing[a] * shape.spacing[a]);
  }
  if (inv2 == 0.0) throw std::invalid_argument("stability_dt: grid has no spatial extent");
  return cfg.courant_factor / std::sqrt(inv2);
}

double Source::sigma_t() const { return wavelength / (std::numbers::pi * fractional_bandwidth); }

double Source::value(double t) const
{
  if (t < 0 || t >= turn_off_time()) return 0.0;
  double const s = sigma_t();
  double const u = t - peak_time();
  return amplitude * std::exp(-0.5 * u * u / (s * s)) * std::sin(kTwoPi * u / wavelength);
}

void Source::validate() const
{
  if (!(wavelength > 0)) throw std::invalid_argument("Source: wavelength must be > 0");
  if (!(fractional_bandwidth > 0 && fractional_bandwidth < 2)) {
    throw std::invalid_argument("Source: fractional_bandwidth must lie in (0, 2)");
  }
  if (!(envelope_widths > 0)) throw std::invalid_argument("Source: envelope_widths must be > 0");
}

template <typename Scalar>
FieldState<Scalar>::FieldState(GridShape const& s) : shape(s)
{
  for (auto& f : components) f.setZero(s.storage_size());
}

template <typename Scalar>
FieldState<Scalar>& FieldState<Scalar>::operator*=(double s)
{
  for (auto& f : components) f *= s;
  return *this;
}

template <typename Scalar>
double total_energy(FieldState<Scalar> const& state, PermittivityGrid const& grid)
{
  auto const& s = state.shape;
  double sum = 0.0;
  for (int ci = 0; ci < 6; ++ci) {
    auto const c = static_cast<Component>(ci);
    auto const& f = state[c];
    for (int i = 0; i <= s.last_index(c, 0); ++i)
      for (int j = 0; j <= s.last_index(c, 1); ++j)
        for (int k = 0; k <= s.last_index(c, 2); ++k) {
          auto const o = s.offset(i, j, k);
          double const w = is_electric(c) ? grid.eps[ci][o] : 1.0;
          sum += w * abs2(f[o]);
        }
  }
  return 0.5 * sum * s.cell_volume();
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

template <typename Scalar>
Solver<Scalar>::Solver(PermittivityGrid const& grid, SimulationConfig const& cfg)
    : shape_(grid.shape), cfg_(cfg), state_(grid.shape)
{
  cfg_.validate(shape_);
  dt_ = stability_dt(shape_, cfg_);
  for (int a = 0; a < 3; ++a) {
    inv_eps_[a] = grid.eps[a].inverse().template cast<Real>();
    if (!grid.eps[a].allFinite() || (grid.eps[a] < 1.0).any()) {
      throw std::invalid_argument("Solver: permittivity must be finite and >= 1");
    }
    phase_[a] = cfg_.boundaries[a].is_periodic() ? bloch_factor<Scalar>(cfg_.boundaries[a].low.bloch_phase)
                                                 : Scalar(1.0);
  }
  build_pml();
}

template <typename Scalar>
void Solver<Scalar>::build_pml()
{
  for (int a = 0; a < 3; ++a) {
    int const n = shape_.cells[a];
    for (int side = 0; side < 2; ++side) {
      Face const& face = side == 0 ? cfg_.boundaries[a].low : cfg_.boundaries[a].high;
      if (face.kind != Face::Kind::Absorbing) continue;
      auto const& ab = face.absorbing;
      double const h = shape_.spacing[a];
      double const thickness = ab.layers * h;
      double const sigma_max = -(ab.grading_order + 1.0) * std::log(ab.target_reflection) / (2.0 * thickness);

      // Depth into the layer in half cells, exact integers so opposing faces
      // get bit-identical coefficients.
      auto depth = [&](int index, bool half) {
        int const twice = 2 * index + (half ? 1 : 0);
        return side == 0 ? 2 * ab.layers - twice : twice - 2 * (n - ab.layers);
      };

      for (int t = 0; t < 3; ++t) {
        if (t == a) continue;
        for (bool electric : {true, false}) {
          PmlTerm term;
          term.target = electric ? e_comp(t) : h_comp(t);
          int const other = 3 - a - t; // the remaining axis
          term.source = electric ? h_comp(other) : e_comp(other);
          term.axis = a;
          bool const first = (t + 1) % 3 == a;
          term.sign = first ? 1.0 : -1.0;
          bool const half = half_offset(term.target, a);
          for (int b = 0; b < 3; ++b) {
            term.lo[b] = 0;
            term.hi[b] = shape_.last_index(term.target, b);
          }
          // Positions with positive depth.
          int first_pos = -1, last_pos = -2;
          for (int p = 0; p <= shape_.last_index(term.target, a); ++p) {
            if (depth(p, half) > 0) {
              if (first_pos < 0) first_pos = p;
              last_pos = p;
            }
          }
          if (first_pos < 0) continue;
          term.lo[a] = first_pos;
          term.hi[a] = last_pos;
          for (int p = first_pos; p <= last_pos; ++p) {
            double const rho = depth(p, half) / (2.0 * ab.layers);
            double const sigma = sigma_max * std::pow(rho, ab.grading_order);
            double const alpha = ab.cfs_alpha * (1.0 - rho);
            double const bb = std::exp(-(sigma + alpha) * dt_);
            double const cc = (sigma + alpha) > 0 ? sigma / (sigma + alpha) * (bb - 1.0) : 0.0;
            term.b.push_back(Real(bb));
            term.c.push_back(Real(cc));
          }
          std::size_t count = 1;
          for (int b = 0; b < 3; ++b) count *= std::size_t(term.hi[b] - term.lo[b] + 1);
          term.psi.setZero(count);
          pml_.push_back(std::move(term));
        }
      }
    }
  }
}

template <typename Scalar>
void Solver<Scalar>::add_source(Source const& src)
{
  src.validate();
  if (!is_electric(src.component)) throw std::invalid_argument("Solver: sources drive E components only");
  for (int b = 0; b < 3; ++b) {
    if (src.position[b] < 0 || src.position[b] > shape_.last_index(src.component, b)) {
      throw std::invalid_argument("Solver: source outside the grid");
    }
  }
  if (in_absorber(src.component, src.position)) throw std::invalid_argument("Solver: source inside an absorbing layer");
  sources_.push_back(src);
  max_source_amplitude_ = std::max(max_source_amplitude_, std::abs(src.amplitude));
}

template <typename Scalar>
double Solver<Scalar>::source_turn_off_time() const
{
  double t = 0.0;
  for (auto const& s : sources_) t = std::max(t, s.turn_off_time());
  return t;
}

template <typename Scalar>
bool Solver<Scalar>::in_absorber(Component c, Index3 const& p) const
{
  for (int a = 0; a < 3; ++a) {
    double const x = p[a] + (half_offset(c, a) ? 0.5 : 0.0);
    auto const& bnd = cfg_.boundaries[a];
    if (bnd.low.kind == Face::Kind::Absorbing && x < bnd.low.absorbing.layers) return true;
    if (bnd.high.kind == Face::Kind::Absorbing && x > shape_.cells[a] - bnd.high.absorbing.layers) return true;
  }
  return false;
}

namespace {

// F += coef * inv_eps * (w1 dS1 - w2 dS2) with backward differences (E), or
// F -= coef * (w1 dS1 - w2 dS2) with forward differences (H).
template <typename Scalar, bool Electric, typename Real = typename Eigen::NumTraits<Scalar>::Real>
void curl_update(GridShape const& s, Component c, Scalar* __restrict F, Real const* __restrict inv_eps,
                 Scalar const* __restrict S1, std::ptrdiff_t st1, Real w1, Scalar const* __restrict S2,
                 std::ptrdiff_t st2, Real w2, Real coef)
{
  int const ni = s.last_index(c, 0), nj = s.last_index(c, 1), nk = s.last_index(c, 2);
  for (int i = 0; i <= ni; ++i) {
    for (int j = 0; j <= nj; ++j) {
      std::ptrdiff_t const o0 = s.offset(i, j, 0);
      Scalar* __restrict f = F + o0;
      Scalar const* __restrict a = S1 + o0;
      Scalar const* __restrict b = S2 + o0;
      if constexpr (Electric) {
        Real const* __restrict ie = inv_eps + o0;
        for (int k = 0; k <= nk; ++k) {
          f[k] += (coef * ie[k]) * (w1 * (a[k] - a[k - st1]) - w2 * (b[k] - b[k - st2]));
        }
      } else {
        for (int k = 0; k <= nk; ++k) {
          f[k] -= coef * (w1 * (a[k + st1] - a[k]) - w2 * (b[k + st2] - b[k]));
        }
      }
    }
  }
}

} // namespace

template <typename Scalar>
void Solver<Scalar>::update_h()
{
  for (int c = 0; c < 3; ++c) {
    int const a1 = (c + 1) % 3, a2 = (c + 2) % 3;
    // H_c -= dt (d_{a1} E_{a2} - d_{a2} E_{a1})
    curl_update<Scalar, false>(shape_, h_comp(c), state_[h_comp(c)].data(), static_cast<Real const*>(nullptr),
                               state_[e_comp(a2)].data(), shape_.stride(a1), Real(1.0 / shape_.spacing[a1]), state_[e_comp(a1)].data(),
                               shape_.stride(a2), Real(1.0 / shape_.spacing[a2]), Real(dt_));
  }
  apply_pml(false);
}

template <typename Scalar>
void Solver<Scalar>::update_e()
{
  for (int c = 0; c < 3; ++c) {
    int const a1 = (c + 1) % 3, a2 = (c + 2) % 3;
    // E_c += dt / eps (d_{a1} H_{a2} - d_{a2} H_{a1})
    curl_update<Scalar, true>(shape_, e_comp(c), state_[e_comp(c)].data(), inv_eps_[c].data(),
                              state_[h_comp(a2)].data(), shape_.stride(a1), Real(1.0 / shape_.spacing[a1]),
                              state_[h_comp(a1)].data(), shape_.stride(a2), Real(1.0 / shape_.spacing[a2]),
                              Real(dt_));
  }
  apply_pml(true);
}

template <typename Scalar>
void Solver<Scalar>::apply_pml(bool electric)
{
  for (auto& term : pml_) {
    if (is_electric(term.target) != electric) continue;
    auto& F = state_[term.target];
    auto const& S = state_[term.source];
    auto const& ie = inv_eps_[axis_of(term.target)];
    std::ptrdiff_t const st = shape_.stride(term.axis);
    Real const w = Real(1.0 / shape_.spacing[term.axis]);
    int const a = term.axis;
    int const nk = term.hi[2] - term.lo[2] + 1;
    Scalar* __restrict psi = term.psi.data();
    Real const* __restrict bv = term.b.data();
    Real const* __restrict cv = term.c.data();
    Real const scale = Real(term.sign * dt_);
    for (int i = term.lo[0]; i <= term.hi[0]; ++i) {
      for (int j = term.lo[1]; j <= term.hi[1]; ++j, psi += nk) {
        std::ptrdiff_t const o0 = shape_.offset(i, j, term.lo[2]);
        Scalar* __restrict f = F.data() + o0;
        Scalar const* __restrict src = S.data() + o0;
        // Coefficient index: fixed along the row unless the layer axis is z.
        int const m0 = a == 0 ? i - term.lo[0] : a == 1 ? j - term.lo[1] : 0;
        int const dm = a == 2 ? 1 : 0;
        if (electric) {
          Real const* __restrict e = ie.data() + o0;
          for (int k = 0; k < nk; ++k) {
            int const m = m0 + dm * k;
            psi[k] = bv[m] * psi[k] + cv[m] * ((src[k] - src[k - st]) * w);
            f[k] += scale * e[k] * psi[k];
          }
        } else {
          for (int k = 0; k < nk; ++k) {
            int const m = m0 + dm * k;
            psi[k] = bv[m] * psi[k] + cv[m] * ((src[k + st] - src[k]) * w);
            f[k] -= scale * psi[k];
          }
        }
      }
    }
  }
}

template <typename Scalar>
void Solver<Scalar>::fill_h_ghosts()
{
  for (int a = 0; a < 3; ++a) {
    Face const& low = cfg_.boundaries[a].low;
    std::ptrdiff_t const st = shape_.stride(a);
    for (int d = 0; d < 3; ++d) {
      if (d == a) continue;
      auto const hc = h_comp(d);
      auto& H = state_[hc];
      if (low.kind == Face::Kind::Periodic) {
        std::ptrdiff_t const wrap = st * shape_.cells[a];
        Scalar const ph = conj_of(phase_[a]);
        for_plane(shape_, hc, a, -1, [&](std::ptrdiff_t o) { H[o] = H[o + wrap] * ph; });
      } else if (low.kind == Face::Kind::Mirror && low.parity == Parity::EvenE) {
        for_plane(shape_, hc, a, -1, [&](std::ptrdiff_t o) { H[o] = -H[o + st]; });
      }
    }
  }
}

template <typename Scalar>
void Solver<Scalar>::enforce_e_boundaries()
{
  for (int a = 0; a < 3; ++a) {
    auto const& bnd = cfg_.boundaries[a];
    int const n = shape_.cells[a];
    for (int c = 0; c < 3; ++c) {
      if (c == a) continue;
      auto const ec = e_comp(c);
      auto& E = state_[ec];
      if (bnd.is_periodic()) {
        std::ptrdiff_t const wrap = shape_.stride(a) * n;
        Scalar const ph = phase_[a];
        for_plane(shape_, ec, a, n, [&](std::ptrdiff_t o) { E[o] = E[o - wrap] * ph; });
        continue;
      }
      bool const zero_low = bnd.low.kind != Face::Kind::Mirror || bnd.low.parity == Parity::OddE;
      if (zero_low) for_plane(shape_, ec, a, 0, [&](std::ptrdiff_t o) { E[o] = Scalar(0); });
      for_plane(shape_, ec, a, n, [&](std::ptrdiff_t o) { E[o] = Scalar(0); });
    }
  }
}

template <typename Scalar>
void Solver<Scalar>::check_stability()
{
  double peak = 0.0;
  for (auto const& f : state_.components) {
    if (!f.allFinite()) {
      throw InstabilityError("Solver: non-finite field at step " + std::to_string(step_), step_);
    }
    peak = std::max(peak, double(f.abs().maxCoeff()));
  }
  if (max_source_amplitude_ > 0 && peak > 1e6 * max_source_amplitude_) {
    throw InstabilityError("Solver: field growth exceeds 1e6 x source amplitude at step " + std::to_string(step_),
                           step_);
  }
}

template <typename Scalar>
void Solver<Scalar>::step()
{
  update_h();
  fill_h_ghosts();
  update_e();
  double const t = (step_ + 0.5) * dt_;
  for (auto const& s : sources_) {
    double const v = s.value(t);
    if (v == 0.0) continue;
    auto const o = shape_.offset(s.position);
    state_[s.component][o] += Scalar(Real(dt_ * inv_eps_[axis_of(s.component)][o] * v));
  }
  enforce_e_boundaries();
  ++step_;
  if (step_ % 64 == 0) check_stability();
}

template <typename Scalar>
double Solver<Scalar>::leapfrog_energy(bool interior_only) const
{
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    auto const ec = e_comp(c);
    auto const& E = state_[ec];
    for (int i = 0; i <= shape_.last_index(ec, 0); ++i)
      for (int j = 0; j <= shape_.last_index(ec, 1); ++j)
        for (int k = 0; k <= shape_.last_index(ec, 2); ++k) {
          if (interior_only && in_absorber(ec, {i, j, k})) continue;
          auto const o = shape_.offset(i, j, k);
          sum += abs2(E[o]) / double(inv_eps_[c][o]);
        }
  }
  for (int c = 0; c < 3; ++c) {
    int const a1 = (c + 1) % 3, a2 = (c + 2) % 3;
    auto const hc = h_comp(c);
    auto const& H = state_[hc];
    auto const& S1 = state_[e_comp(a2)];
    auto const& S2 = state_[e_comp(a1)];
    std::ptrdiff_t const st1 = shape_.stride(a1), st2 = shape_.stride(a2);
    Real const w1 = Real(1.0 / shape_.spacing[a1]), w2 = Real(1.0 / shape_.spacing[a2]);
    for (int i = 0; i <= shape_.last_index(hc, 0); ++i)
      for (int j = 0; j <= shape_.last_index(hc, 1); ++j)
        for (int k = 0; k <= shape_.last_index(hc, 2); ++k) {
          if (interior_only && in_absorber(hc, {i, j, k})) continue;
          auto const o = shape_.offset(i, j, k);
          Scalar const curl = w1 * (S1[o + st1] - S1[o]) - w2 * (S2[o + st2] - S2[o]);
          sum += real_dot(H[o], Scalar(H[o] - Real(dt_) * curl));
        }
  }
  return 0.5 * sum * shape_.cell_volume();
}

template <typename Scalar>
Snapshot<Scalar> Solver<Scalar>::snapshot() const
{
  Snapshot<Scalar> s;
  s.step = step_;
  s.time = time();
  s.shape = shape_;
  for (int c = 0; c < 3; ++c) s.E[c] = state_.components[c];
  return s;
}

template <typename Scalar>
RunResult<Scalar> run(PermittivityGrid const& grid, SimulationConfig const& cfg, std::span<Source const> sources,
                      std::span<Probe const> probes, SnapshotObserver<Scalar> const& observer)
{
  Solver<Scalar> solver(grid, cfg);
  for (auto const& s : sources) solver.add_source(s);
  for (auto const& p : probes) {
    for (int b = 0; b < 3; ++b) {
      if (p.position[b] < 0 || p.position[b] > grid.shape.last_index(p.component, b)) {
        throw std::invalid_argument("run: probe outside the grid");
      }
    }
    if (solver.in_absorber(p.component, p.position)) throw std::invalid_argument("run: probe inside an absorbing layer");
  }

  RunResult<Scalar> result;
  result.dt = solver.dt();
  result.source_off_step = std::max(0, int(std::ceil(solver.source_turn_off_time() / solver.dt() - 0.5)));
  for (auto const& p : probes) {
    ProbeRecord<Scalar> rec;
    rec.probe = p;
    rec.dt = solver.dt();
    rec.values.reserve(cfg.num_steps);
    result.probes.push_back(std::move(rec));
  }
  std::vector<int> schedule = cfg.snapshot_steps;
  std::sort(schedule.begin(), schedule.end());
  auto next = schedule.begin();

  for (int n = 0; n < cfg.num_steps; ++n) {
    solver.step();
    for (auto& rec : result.probes) rec.values.push_back(solver.sample(rec.probe));
    while (next != schedule.end() && *next <= solver.steps_taken()) {
      if (*next == solver.steps_taken()) {
        if (observer) observer(solver);
        else result.snapshots.push_back(solver.snapshot());
      }
      ++next;
    }
  }
  return result;
}

void write_raw_block(std::string const& prefix, std::vector<double> const& values, Index3 const& dims,
                     std::array<double, 3> const& spacing, std::string const& component, int step)
{
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes a little-endian host");
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + prefix + ".bin");
  bin.write(reinterpret_cast<char const*>(values.data()), std::streamsize(values.size() * sizeof(double)));
  std::ofstream txt(prefix + ".txt");
  if (!txt) throw std::runtime_error("cannot open " + prefix + ".txt");
  txt << "format = float64_le\n"
      << "order = x_slowest_z_fastest\n"
      << "dims = " << dims[0] << ' ' << dims[1] << ' ' << dims[2] << '\n'
      << "spacing_nm = " << format_double(spacing[0]) << ' ' << format_double(spacing[1]) << ' '
      << format_double(spacing[2]) << '\n'
      << "component = " << component << '\n'
      << "step = " << step << '\n';
}

void write_snapshot(std::string const& prefix, Snapshot<double> const& snap, Component c)
{
  if (!is_electric(c)) throw std::invalid_argument("write_snapshot: snapshots hold E components only");
  auto const& s = snap.shape;
  Index3 dims{};
  for (int b = 0; b < 3; ++b) dims[b] = s.last_index(c, b) + 1;
  std::vector<double> values;
  values.reserve(std::size_t(dims[0]) * dims[1] * dims[2]);
  auto const& f = snap.E[axis_of(c)];
  for (int i = 0; i < dims[0]; ++i)
    for (int j = 0; j < dims[1]; ++j)
      for (int k = 0; k < dims[2]; ++k) values.push_back(f[s.offset(i, j, k)]);
  write_raw_block(prefix, values, dims, s.spacing, component_name(c), snap.step);
}

void write_probe_csv(std::ostream& os, ProbeRecord<double> const& rec)
{
  double const lag = is_electric(rec.probe.component) ? 1.0 : 0.5;
  os << "step,time,value\n";
  for (std::size_t n = 0; n < rec.values.size(); ++n) {
    os << n + 1 << ',' << format_double((n + lag) * rec.dt) << ',' << format_double(rec.values[n]) << '\n';
  }
}

#define NANOBEAM_INSTANTIATE(T)                                                                       \
  template struct FieldState<T>;                                                                    \
  template class Solver<T>;                                                                         \
  template double total_energy(FieldState<T> const&, PermittivityGrid const&);                       \
  template RunResult<T> run(PermittivityGrid const&, SimulationConfig const&, std::span<Source const>, \
                            std::span<Probe const>, SnapshotObserver<T> const&);

NANOBEAM_INSTANTIATE(float)
NANOBEAM_INSTANTIATE(double)
NANOBEAM_INSTANTIATE(std::complex<double>)
#undef NANOBEAM_INSTANTIATE

} // namespace nanobeam::fdtd

#include "nanobeam/tmm.hpp"

#include <Eigen/Core>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace nanobeam::tmm {

namespace {

using cplx = std::complex<double>;

double transmission(LayerStack const& stack, double lambda) { return stack_rt(stack, lambda).T; }

/// Half-max crossing between `inner` (above half) and `outer` (below).
double bisect_half(LayerStack const& stack, double inner, double outer, double half)
{
  for (int it = 0; it < 200 && std::abs(outer - inner) > 1e-13 * std::abs(inner); ++it) {
    double const mid = 0.5 * (inner + outer);
    (transmission(stack, mid) > half ? inner : outer) = mid;
  }
  return 0.5 * (inner + outer);
}

/// Integral of n^2 over [a, b] for the piecewise-constant profile.
double eps_integral(std::vector<double> const& edges, std::vector<double> const& eps, double a, double b)
{
  // edges[m] .. edges[m+1] holds eps[m + 1]; eps[0] left of edges[0], eps.back() right of edges.back().
  double sum = 0.0;
  double x = a;
  std::size_t m = std::upper_bound(edges.begin(), edges.end(), a) - edges.begin();
  while (x < b) {
    double const next = m < edges.size() ? std::min(b, edges[m]) : b;
    sum += eps[m] * (next - x);
    x = next;
    ++m;
  }
  return sum;
}

} // namespace

double LayerStack::total_thickness() const
{
  double t = 0.0;
  for (auto const& l : layers) t += l.thickness;
  return t;
}

LayerStack LayerStack::reversed() const
{
  LayerStack r{ambient_right, ambient_left, layers};
  std::reverse(r.layers.begin(), r.layers.end());
  return r;
}

void LayerStack::validate() const
{
  if (!(ambient_left >= 1.0) || !(ambient_right >= 1.0))
    throw std::invalid_argument("LayerStack: ambient indices must be >= 1");
  for (auto const& l : layers) {
    if (!(l.index >= 1.0)) throw std::invalid_argument("LayerStack: layer index must be >= 1");
    if (!(l.thickness > 0.0)) throw std::invalid_argument("LayerStack: layer thickness must be > 0");
  }
}

RT stack_rt(LayerStack const& stack, double lambda)
{
  if (!(lambda > 0.0)) throw std::invalid_argument("stack_rt: wavelength must be > 0");
  double const k0 = 2.0 * std::numbers::pi / lambda;
  cplx m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
  for (auto const& l : stack.layers) {
    double const d = k0 * l.index * l.thickness;
    double const c = std::cos(d), s = std::sin(d);
    cplx const a12(0.0, s / l.index), a21(0.0, s * l.index);
    cplx const n11 = m11 * c + m12 * a21;
    cplx const n12 = m11 * a12 + m12 * c;
    cplx const n21 = m21 * c + m22 * a21;
    cplx const n22 = m21 * a12 + m22 * c;
    m11 = n11;
    m12 = n12;
    m21 = n21;
    m22 = n22;
  }
  double const n0 = stack.ambient_left, ns = stack.ambient_right;
  cplx const den = n0 * m11 + n0 * ns * m12 + m21 + ns * m22;
  cplx const r = (n0 * m11 + n0 * ns * m12 - m21 - ns * m22) / den;
  cplx const t = 2.0 * n0 / den;
  return {std::norm(r), ns / n0 * std::norm(t)};
}

StackResonance stack_resonance(LayerStack const& stack, double lambda_min, double lambda_max)
{
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min))
    throw std::invalid_argument("stack_resonance: invalid wavelength range");
  stack.validate();

  int const N = 4001;
  std::vector<double> lam(N), T(N);
  for (int i = 0; i < N; ++i) {
    lam[i] = lambda_min + (lambda_max - lambda_min) * i / (N - 1);
    T[i] = transmission(stack, lam[i]);
  }
  int const imax = int(std::max_element(T.begin(), T.end()) - T.begin());
  std::vector<double> sorted = T;
  std::nth_element(sorted.begin(), sorted.begin() + N / 2, sorted.end());
  double const background = sorted[N / 2];
  if (imax == 0 || imax == N - 1 || !(T[imax] > 10.0 * background))
    throw std::runtime_error("stack_resonance: no isolated transmission peak in range");

  // Golden-section maximization on the bracketing samples.
  double a = lam[imax - 1], b = lam[imax + 1];
  double const g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = transmission(stack, x1), f2 = transmission(stack, x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = transmission(stack, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = transmission(stack, x2);
    }
  }
  double const peak = 0.5 * (a + b);
  double const tmax = transmission(stack, peak);
  double const half = 0.5 * tmax;

  // Half-max crossings, stepping outward with a doubling step from 1e-9 relative.
  auto crossing = [&](double dir) {
    double step = 1e-9 * peak;
    double inner = peak, outer = peak + dir * step;
    while (transmission(stack, outer) > half) {
      inner = outer;
      step *= 2.0;
      outer = peak + dir * step;
      if (outer <= lambda_min || outer >= lambda_max)
        throw std::runtime_error("stack_resonance: peak half-width exceeds the range");
    }
    return bisect_half(stack, inner, outer, half);
  };
  double const lo = crossing(-1.0), hi = crossing(1.0);

  // Lorentzian: 1 / T is quadratic in lambda. Least squares over the half-max span.
  int const M = 41;
  Eigen::MatrixXd A(M, 3);
  Eigen::VectorXd y(M);
  for (int i = 0; i < M; ++i) {
    double const x = lo + (hi - lo) * i / (M - 1);
    double const u = (x - peak) / (hi - lo);
    A(i, 0) = 1.0;
    A(i, 1) = u;
    A(i, 2) = u * u;
    y(i) = 1.0 / transmission(stack, x);
  }
  Eigen::Vector3d const p = A.colPivHouseholderQr().solve(y);
  if (!(p(2) > 0.0)) throw std::runtime_error("stack_resonance: Lorentzian fit failed");
  double const floor = p(0) - p(1) * p(1) / (4.0 * p(2));
  double const fwhm = 2.0 * std::sqrt(floor / p(2)) * (hi - lo);
  return {peak, peak / fwhm, fwhm, tmax};
}

LayerStack quarter_wave_stack(double n_high, double n_low, int pairs, double lambda0)
{
  if (pairs < 0) throw std::invalid_argument("quarter_wave_stack: pairs must be >= 0");
  LayerStack s;
  for (int p = 0; p < pairs; ++p) {
    s.layers.push_back({n_high, lambda0 / (4.0 * n_high)});
    s.layers.push_back({n_low, lambda0 / (4.0 * n_low)});
  }
  s.validate();
  return s;
}

LayerStack defect_stack(double n_high, double n_low, int pairs_per_side, double lambda0, double extra)
{
  if (pairs_per_side < 1) throw std::invalid_argument("defect_stack: pairs_per_side must be >= 1");
  if (!(extra >= 0.0)) throw std::invalid_argument("defect_stack: extra must be >= 0");
  Layer const H{n_high, lambda0 / (4.0 * n_high)};
  Layer const L{n_low, lambda0 / (4.0 * n_low)};
  LayerStack s;
  for (int p = 0; p < pairs_per_side; ++p) {
    s.layers.push_back(H);
    s.layers.push_back(L);
  }
  s.layers.push_back(H);
  s.layers.push_back({n_low, L.thickness + extra});
  s.layers.push_back(H);
  for (int p = 0; p < pairs_per_side; ++p) {
    s.layers.push_back(L);
    s.layers.push_back(H);
  }
  s.validate();
  return s;
}

PermittivityGrid rasterize_stack(LayerStack const& stack, double spacing, double lead, double trail,
                                 int boundary_cells)
{
  stack.validate();
  if (!(spacing > 0.0)) throw std::invalid_argument("rasterize_stack: spacing must be > 0");
  if (!(lead >= 0.0) || !(trail >= 0.0) || boundary_cells < 0)
    throw std::invalid_argument("rasterize_stack: lead, trail and boundary_cells must be >= 0");

  int const nlead = boundary_cells + int(std::ceil(lead / spacing));
  int const nbody = int(std::ceil((stack.total_thickness() + trail) / spacing));
  GridShape shape;
  shape.cells = {nlead + nbody + boundary_cells, 1, 1};
  shape.spacing = {spacing, spacing, spacing};
  shape.origin = {-double(nlead), 0.0, 0.0};

  std::vector<double> edges{0.0};
  std::vector<double> eps{stack.ambient_left * stack.ambient_left};
  double x = 0.0;
  double eps_max = eps[0];
  for (auto const& l : stack.layers) {
    x += l.thickness;
    edges.push_back(x);
    eps.push_back(l.index * l.index);
    eps_max = std::max(eps_max, eps.back());
  }
  eps.push_back(stack.ambient_right * stack.ambient_right);
  eps_max = std::max(eps_max, eps.back());
  double const eps_min = *std::min_element(eps.begin(), eps.end());

  PermittivityGrid grid;
  grid.shape = shape;
  grid.eps_material = eps_max;
  for (int a = 0; a < 3; ++a) {
    auto const c = static_cast<Component>(a);
    grid.eps[a].setOnes(shape.storage_size());
    for (int i = 0; i <= shape.last_index(c, 0); ++i) {
      double const xc = shape.coordinate(c, 0, i);
      double const v = std::clamp(eps_integral(edges, eps, xc - 0.5 * spacing, xc + 0.5 * spacing) / spacing,
                                  eps_min, eps_max);
      for (int j = 0; j <= shape.last_index(c, 1); ++j)
        for (int k = 0; k <= shape.last_index(c, 2); ++k) grid.eps[a][shape.offset(i, j, k)] = v;
    }
  }
  return grid;
}

} // namespace nanobeam::tmm

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>

#include "soliton_lab/common.hpp"
#include "soliton_lab/fft.hpp"

namespace soliton_lab {

// Uniform periodic grid on [-L, L). n is a power of two so x = 0 is a node.
// Wavenumber convention: k_j = (pi/L) j for j <= n/2, (pi/L)(j-n) above;
// odd-order derivative multipliers zero the Nyquist mode, even orders keep it.
struct Grid {
  int n = 0;
  Real L = 0;
  Real dx = 0;
  Field x;
  Field k;

  Grid(int n_, Real L_) : n(n_), L(L_) {
    if (!detail::is_power_of_two(static_cast<std::size_t>(n)) || n < 256)
      throw Error("grid: n must be a power of two >= 256, got " + std::to_string(n));
    if (!(L > 0)) throw Error("grid: L must be positive");
    dx = 2.0 * L / n;
    x.resize(n);
    k.resize(n);
    for (int j = 0; j < n; ++j) {
      x[j] = -L + dx * j;
      int jj = (j <= n / 2) ? j : j - n;
      k[j] = kPi / L * jj;
    }
  }

  Real k_max() const { return kPi / dx; }
  int index_of_zero() const { return n / 2; }
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int n, Real L) { return std::make_shared<const Grid>(n, L); }

// Pair (eta, v) sampled at one time. Lifting is valid while max eta < 1.
struct HydroState {
  Field eta;
  Field v;
  Real time = 0.0;
};

inline Real max_eta(const HydroState& s) {
  Real m = -1e300;
  for (Real e : s.eta) m = std::max(m, e);
  return m;
}

// -------- transforms on real fields --------

inline CField to_spectrum(const Field& f) {
  CField z(f.begin(), f.end());
  fft_forward(z);
  return z;
}

inline Field to_field(CField z) {
  fft_inverse(z);
  Field f(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) f[i] = z[i].real();
  return f;
}

namespace detail {

inline void apply_derivative_multiplier(const Grid& g, CField& z, int order) {
  for (int j = 0; j < g.n; ++j) {
    Complex m = std::pow(Complex(0.0, g.k[j]), order);
    if (order % 2 == 1 && j == g.n / 2) m = 0.0;
    z[j] *= m;
  }
}

}  // namespace detail

// Fourier-multiplier derivative; exact for band-limited fields.
inline Field spectral_derivative(const Grid& g, const Field& f, int order = 1) {
  if (order < 0 || order > 8) throw Error("spectral_derivative: order out of range");
  CField z = to_spectrum(f);
  detail::apply_derivative_multiplier(g, z, order);
  return to_field(std::move(z));
}

inline CField spectral_derivative(const Grid& g, const CField& f, int order = 1) {
  CField z = f;
  fft_forward(z);
  detail::apply_derivative_multiplier(g, z, order);
  fft_inverse(z);
  return z;
}

// Sample of f(. + a) by trigonometric interpolation. The Nyquist mode gets
// the real factor cos(k_N a) so real fields stay real.
inline Field shifted(const Grid& g, const Field& f, Real a) {
  CField z = to_spectrum(f);
  for (int j = 0; j < g.n; ++j) {
    if (j == g.n / 2)
      z[j] *= std::cos(g.k[j] * a);
    else
      z[j] *= std::exp(Complex(0.0, g.k[j] * a));
  }
  return to_field(std::move(z));
}

inline CField shifted(const Grid& g, const CField& f, Real a) {
  CField z = f;
  fft_forward(z);
  for (int j = 0; j < g.n; ++j) z[j] *= std::exp(Complex(0.0, g.k[j] * a));
  fft_inverse(z);
  return z;
}

inline HydroState shifted(const Grid& g, const HydroState& s, Real a) {
  return HydroState{shifted(g, s.eta, a), shifted(g, s.v, a), s.time};
}

// Periodic trapezoid quadrature (spectrally accurate for decaying fields).
inline Real integrate(const Grid& g, const Field& f) {
  Real s = 0;
  for (Real y : f) s += y;
  return s * g.dx;
}

inline Real inner(const Grid& g, const Field& a, const Field& b) {
  Real s = 0;
  for (int i = 0; i < g.n; ++i) s += a[i] * b[i];
  return s * g.dx;
}

inline Real mean(const Grid& g, const Field& f) { return integrate(g, f) / (2.0 * g.L); }

// Antiderivative with zero mean input assumed handled by caller: returns
// P with P' = f - mean(f), fixed so that P(0) = 0.
inline Field antiderivative_zero_at_origin(const Grid& g, const Field& f) {
  CField z = to_spectrum(f);
  z[0] = 0.0;
  for (int j = 1; j < g.n; ++j) {
    if (j == g.n / 2)
      z[j] = 0.0;
    else
      z[j] /= Complex(0.0, g.k[j]);
  }
  Field p = to_field(std::move(z));
  const Real p0 = p[g.index_of_zero()];
  for (auto& y : p) y -= p0;
  return p;
}

// -------- norms and the metric --------

// Weighted Sobolev-type norm of the pair (eta, v):
//   sum_{m<=l+1} int (d^m eta)^2 w_rho + sum_{m<=l} int (d^m v)^2 w_rho,
// returned as the square root. The weight |x|^rho is realized on the box as
// min(|x|, L-1)^rho and the integrand is windowed to where the differentiated
// field exceeds 1e-12 in magnitude (the truncation error is below tail size).
inline Real x_norm(const Grid& g, const Field& eta, const Field& v, Real rho = 0.0, int l = 0) {
  if (rho < 0) throw Error("x_norm: rho must be >= 0");
  if (l < -1) throw Error("x_norm: l must be >= -1");
  Field w(g.n, 1.0);
  if (rho > 0) {
    for (int i = 0; i < g.n; ++i) w[i] = std::pow(std::min(std::abs(g.x[i]), g.L - 1.0), rho);
  }
  auto add_terms = [&](const Field& f, int mmax, Real& acc) {
    Field cur = f;
    for (int m = 0; m <= mmax; ++m) {
      if (m > 0) cur = spectral_derivative(g, f, m);
      Real s = 0;
      for (int i = 0; i < g.n; ++i) {
        if (rho > 0 && std::abs(cur[i]) <= 1e-12) continue;
        s += cur[i] * cur[i] * w[i];
      }
      acc += s * g.dx;
    }
  };
  Real acc = 0;
  add_terms(eta, l + 1, acc);
  add_terms(v, l, acc);
  return std::sqrt(acc);
}

inline Real x_norm(const Grid& g, const HydroState& s, Real rho = 0.0, int l = 0) {
  return x_norm(g, s.eta, s.v, rho, l);
}

// Energy-space metric between classical fields:
//   ||psi1-psi2||_{Linf([-1,1])} + ||eta1-eta2||_{L2} + ||psi1'-psi2'||_{L2}.
// `beta` is the gauge twist of the surrounding run; derivatives are taken on
// the twisted (periodic) representatives so non-periodic backgrounds do not
// ring.
inline Real metric_d(const Grid& g, const CField& psi1, const CField& psi2, Real beta = 0.0) {
  if (static_cast<int>(psi1.size()) != g.n || static_cast<int>(psi2.size()) != g.n)
    throw Error("metric_d: fields not on this grid");
  Real linf = 0;
  for (int i = 0; i < g.n; ++i)
    if (std::abs(g.x[i]) <= 1.0) linf = std::max(linf, std::abs(psi1[i] - psi2[i]));
  Real l2eta = 0;
  for (int i = 0; i < g.n; ++i) {
    Real d = (1.0 - std::norm(psi1[i])) - (1.0 - std::norm(psi2[i]));
    l2eta += d * d;
  }
  auto twisted_derivative = [&](const CField& psi) {
    CField z(g.n);
    for (int i = 0; i < g.n; ++i) z[i] = psi[i] * std::exp(Complex(0.0, beta * g.x[i]));
    fft_forward(z);
    for (int j = 0; j < g.n; ++j) z[j] *= Complex(0.0, g.k[j] - beta);
    fft_inverse(z);
    for (int i = 0; i < g.n; ++i) z[i] *= std::exp(Complex(0.0, -beta * g.x[i]));
    return z;
  };
  CField d1 = twisted_derivative(psi1), d2 = twisted_derivative(psi2);
  Real l2d = 0;
  for (int i = 0; i < g.n; ++i) l2d += std::norm(d1[i] - d2[i]);
  return linf + std::sqrt(l2eta * g.dx) + std::sqrt(l2d * g.dx);
}

// 2/3-rule dealias mask applied in place to a spectrum.
inline void dealias(const Grid& g, CField& z) {
  const Real kc = (2.0 / 3.0) * g.k_max();
  for (int j = 0; j < g.n; ++j)
    if (std::abs(g.k[j]) > kc) z[j] = 0.0;
}

}  // namespace soliton_lab

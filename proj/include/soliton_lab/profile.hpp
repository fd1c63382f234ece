#pragma once

#include <algorithm>
#include <cmath>
#include <memory>

#include "soliton_lab/grid.hpp"
#include "soliton_lab/nonlinearity.hpp"

namespace soliton_lab {

// N_c(xi) = c^2 xi^2 - 4(1-xi) F(1-xi). The profile satisfies
// -(eta')^2 = N_c(eta) and -eta'' = N_c'(eta)/2; xi_c = eta(0) is the
// smallest positive root of N_c.
inline Real n_c(const NonlinearityModel& model, Real c, Real xi) {
  return c * c * xi * xi - 4.0 * (1.0 - xi) * potential_F(model, 1.0 - xi);
}

inline Real n_c_prime(const NonlinearityModel& model, Real c, Real xi) {
  return 2.0 * c * c * xi + 4.0 * potential_F(model, 1.0 - xi) -
         4.0 * (1.0 - xi) * model.f(1.0 - xi);
}

inline Real n_c_third(const NonlinearityModel& model, Real xi) {
  return -12.0 * model.fp(1.0 - xi) - 4.0 * (1.0 - xi) * model.fpp(1.0 - xi);
}

namespace detail {

// Cancellation-free kernels. Direct evaluation of -N_c(z)/z^2 etc. loses all
// digits in the far tail (z ~ 1e-30), so every ratio used downstream is an
// integral-remainder form with smooth integrands in t.

// K_F(z) = F(1-z)/z^2 = int_0^1 (1-t)(-f'(1-tz)) dt
inline Real kernel_F(const NonlinearityModel& m, Real z) {
  const auto& g = gauss16();
  Real s = 0;
  for (int i = 0; i < 16; ++i) s += g.w[i] * (1.0 - g.t[i]) * (-m.fp(1.0 - g.t[i] * z));
  return s;
}

// dK_F/dz = int_0^1 (1-t) t f''(1-tz) dt
inline Real kernel_F_prime(const NonlinearityModel& m, Real z) {
  const auto& g = gauss16();
  Real s = 0;
  for (int i = 0; i < 16; ++i) s += g.w[i] * (1.0 - g.t[i]) * g.t[i] * m.fpp(1.0 - g.t[i] * z);
  return s;
}

// W(z) = -N_c(z)/z^2 = -c^2 + 4(1-z) K_F(z);  (eta'/eta)^2 = W(eta)
inline Real kernel_W(const NonlinearityModel& m, Real c, Real z) {
  return -c * c + 4.0 * (1.0 - z) * kernel_F(m, z);
}

// eta''/eta = -N_c'(z)/(2z) = -c^2 - K_G(z)/2 with
// K_G(z) = int_0^1 [8 f(1-tz) + 4(1-tz) f'(1-tz)] dt
inline Real kernel_R1(const NonlinearityModel& m, Real c, Real z) {
  const auto& g = gauss16();
  Real s = 0;
  for (int i = 0; i < 16; ++i) {
    const Real u = 1.0 - g.t[i] * z;
    s += g.w[i] * (8.0 * m.f(u) + 4.0 * u * m.fp(u));
  }
  return -c * c - 0.5 * s;
}

// q_1/eta = 2 nu^2 + int_0^1 (1-t)(t-z) N'''(tz) dt  (positive on the window)
inline Real kernel_q1_ratio(const NonlinearityModel& m, Real nu2, Real z) {
  const auto& g = gauss16();
  Real s = 0;
  for (int i = 0; i < 16; ++i)
    s += g.w[i] * (1.0 - g.t[i]) * (g.t[i] - z) * n_c_third(m, g.t[i] * z);
  return 2.0 * nu2 + s;
}

// m_1' = (z/2) K_m(z),  K_m(z) = int_0^1 t(1-t) N'''(tz) dt
inline Real kernel_Km(const NonlinearityModel& m, Real z) {
  const auto& g = gauss16();
  Real s = 0;
  for (int i = 0; i < 16; ++i) s += g.w[i] * g.t[i] * (1.0 - g.t[i]) * n_c_third(m, g.t[i] * z);
  return s;
}

// V(z) = (nu^2 - W(z))/z = [c_s^2 - 4(1-z)K_F(z)]/z, V(0) = -k/3
inline Real kernel_V(const NonlinearityModel& m, Real z) {
  const auto& g = gauss16();
  Real s = 0;
  for (int i = 0; i < 16; ++i) {
    const Real u = g.t[i] * z;
    s += g.w[i] * (4.0 * kernel_F(m, u) - 4.0 * (1.0 - u) * kernel_F_prime(m, u));
  }
  return s;
}

}  // namespace detail

// Smallest root of N_c in (0,1). N_c < 0 on (0, xi_c).
inline Real xi_c(const NonlinearityModel& model, Real c) {
  const Real cs = sound_speed(model);
  const Real nu2 = cs * cs - c * c;
  if (!(nu2 > 0)) throw Error("xi_c: no transonic wave at this speed (|c| >= c_s)");
  auto W = [&](Real z) { return detail::kernel_W(model, c, z); };
  // W(0+) = nu^2 > 0; first sign change of W on (0,1) is the root.
  const int nscan = 4096;
  Real lo = 0.0, hi = -1.0, wlo = nu2;
  for (int i = 1; i <= nscan; ++i) {
    const Real z = static_cast<Real>(i) / nscan;
    const Real wz = W(z);
    if (wz <= 0.0) {
      lo = static_cast<Real>(i - 1) / nscan;
      hi = z;
      wlo = W(lo > 0 ? lo : 1e-15);
      break;
    }
  }
  if (hi < 0) throw Error("xi_c: no transonic wave at this speed (no sign change of N_c in (0,1))");
  for (int it = 0; it < 200; ++it) {
    const Real mid = 0.5 * (lo + hi);
    const Real wm = W(mid);
    if ((wm > 0) == (wlo > 0)) {
      lo = mid;
      wlo = wm;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-17 * hi) break;
  }
  // Newton polish
  Real z = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const Real h = 1e-7 * std::max(z, Real(1e-3));
    const Real d = (W(z + h) - W(z - h)) / (2.0 * h);
    if (d == 0) break;
    const Real step = W(z) / d;
    z -= step;
    if (!(z > lo - (hi - lo) && z < hi + (hi - lo))) {
      z = 0.5 * (lo + hi);
      break;
    }
    if (std::abs(step) < 1e-17 * z) break;
  }
  return z;
}

namespace detail {

// Monotone table for the quadrature x(eta) = int_eta^xi dz / sqrt(-N_c(z)),
// built with the turning-point substitution eta = xi - s^2 near eta = xi
// (region A, z in [xi/2, xi]) and log-spaced z panels in the tail (region B,
// z in [eta_cut, xi/2]). Supports evaluation of eta at arbitrary x and of
// the exact derivative relations.
class ProfileTable {
 public:
  ProfileTable(const NonlinearityModel& model, Real c, Real xi, Real nu)
      : model_(model), c_(c), xi_(xi), nu_(nu) {
    eta_cut_ = std::max(xi * 1e-10, 1e-250);
    build();
  }

  Real xi() const { return xi_; }
  Real nu() const { return nu_; }
  Real eta_cut() const { return eta_cut_; }
  Real x_end() const { return xB_.back(); }

  // Y(s) = [N(xi) - N(xi - s^2)]/s^2 = int_0^1 N'(xi - t s^2) dt; Y(0) = N'(xi) > 0.
  Real Y(Real s) const {
    const auto& g = gauss16();
    Real acc = 0;
    for (int i = 0; i < 16; ++i) acc += g.w[i] * n_c_prime(model_, c_, xi_ - g.t[i] * s * s);
    return acc;
  }

  // eta at |x| (even profile); exponential continuation below eta_cut.
  Real eta_at(Real xabs) const {
    if (xabs >= xB_.back()) return eta_cut_ * std::exp(-nu_ * (xabs - xB_.back()));
    if (xabs <= xA_.back()) {
      const Real s = invert_A(xabs);
      return xi_ - s * s;
    }
    const Real u = invert_B(xabs);
    return std::exp(u);
  }

  Real W_at(Real z) const { return std::max(kernel_W(model_, c_, z), Real(0)); }

 private:
  void build() {
    const int nA = 512, nB = 1024;
    const Real sA = std::sqrt(xi_ / 2.0);
    sA_.resize(nA + 1);
    xA_.resize(nA + 1);
    gA_.resize(nA + 1);
    const auto& q = gauss8();
    Real acc = 0;
    for (int j = 0; j <= nA; ++j) {
      sA_[j] = sA * j / nA;
      gA_[j] = 2.0 / std::sqrt(Y(sA_[j]));
      if (j > 0) {
        const Real a = sA_[j - 1], b = sA_[j];
        Real panel = 0;
        for (int i = 0; i < 8; ++i) {
          const Real s = 0.5 * (a + b) + 0.5 * (b - a) * q.x[i];
          panel += q.w[i] * 2.0 / std::sqrt(Y(s));
        }
        acc += panel * 0.5 * (b - a);
      }
      xA_[j] = acc;
    }
    // region B: u = ln z from ln(xi/2) down to ln(eta_cut); dx = -du/sqrt(W(e^u))
    uB_.resize(nB + 1);
    xB_.resize(nB + 1);
    gB_.resize(nB + 1);
    const Real u0 = std::log(xi_ / 2.0), u1 = std::log(eta_cut_);
    for (int j = 0; j <= nB; ++j) {
      uB_[j] = u0 + (u1 - u0) * j / nB;
      gB_[j] = 1.0 / std::sqrt(W_at(std::exp(uB_[j])));
      if (j == 0) {
        xB_[0] = xA_.back();
      } else {
        const Real a = uB_[j - 1], b = uB_[j];
        Real panel = 0;
        for (int i = 0; i < 8; ++i) {
          const Real u = 0.5 * (a + b) + 0.5 * (b - a) * q.x[i];
          panel += q.w[i] / std::sqrt(W_at(std::exp(u)));
        }
        xB_[j] = xB_[j - 1] - panel * 0.5 * (b - a);  // du < 0 along increasing x
      }
    }
  }

  // invert x(s) = target on region A via cubic Hermite on the stored panel
  Real invert_A(Real x) const {
    const auto it = std::upper_bound(xA_.begin(), xA_.end(), x);
    std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xA_.begin(), 1), xA_.size() - 1);
    const Real h = sA_[j] - sA_[j - 1];
    Real t = 0.5;
    for (int iter = 0; iter < 30; ++iter) {
      const Real H = hermite(xA_[j - 1], xA_[j], gA_[j - 1] * h, gA_[j] * h, t);
      const Real Hp = hermite_d(xA_[j - 1], xA_[j], gA_[j - 1] * h, gA_[j] * h, t);
      const Real dt = (H - x) / Hp;
      t -= dt;
      t = std::clamp(t, Real(0), Real(1));
      if (std::abs(dt) < 1e-15) break;
    }
    return sA_[j - 1] + t * h;
  }

  Real invert_B(Real x) const {
    // xB_ decreases in u but increases in index; binary search on xB_
    const auto it = std::upper_bound(xB_.begin(), xB_.end(), x);
    std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xB_.begin(), 1), xB_.size() - 1);
    const Real h = uB_[j] - uB_[j - 1];  // negative step in u... u decreases: h<0? u1<u0 so h<0
    Real t = 0.5;
    for (int iter = 0; iter < 30; ++iter) {
      const Real H = hermite(xB_[j - 1], xB_[j], -gB_[j - 1] * h, -gB_[j] * h, t);
      const Real Hp = hermite_d(xB_[j - 1], xB_[j], -gB_[j - 1] * h, -gB_[j] * h, t);
      const Real dt = (H - x) / Hp;
      t -= dt;
      t = std::clamp(t, Real(0), Real(1));
      if (std::abs(dt) < 1e-15) break;
    }
    return uB_[j - 1] + t * h;
  }

  static Real hermite(Real f0, Real f1, Real d0, Real d1, Real t) {
    const Real t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * f1 +
           (t3 - t2) * d1;
  }
  static Real hermite_d(Real f0, Real f1, Real d0, Real d1, Real t) {
    const Real t2 = t * t;
    return (6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * d0 + (-6 * t2 + 6 * t) * f1 +
           (3 * t2 - 2 * t) * d1;
  }

  NonlinearityModel model_;
  Real c_, xi_, nu_, eta_cut_;
  Field sA_, xA_, gA_;  // region A: s nodes, cumulative x, dx/ds
  Field uB_, xB_, gB_;  // region B: u = ln z nodes, cumulative x, |dx/du|
};

}  // namespace detail

// Sampled travelling-wave profile on a grid, plus enough structure to
// evaluate eta at arbitrary points (operator assembly needs half-grid
// coefficients). Immutable after construction.
struct TravelingWave {
  GridPtr grid;
  NonlinearityModel model;
  Real c = 0, cs = 0, nu = 0, xi = 0;
  Field eta, eta_x, eta_xx, eta_xxx;
  Field v, v_x;
  Real ode_residual = 0;             // max |-eta'' - N'(eta)/2| (spectral eta'')
  Real first_integral_residual = 0;  // max |(eta')^2 + N(eta)|
  Real decay_rate_fit = 0;           // -slope of log eta over the far tail
  Real amplitude_Mc = 0;             // integral formula
  Real amplitude_tail_fit = 0;       // eta e^{+nu x} averaged over the tail window
  std::shared_ptr<const detail::ProfileTable> table;

  Real eta_at(Real x) const { return table->eta_at(std::abs(x)); }
};

// M_c by the integral formula, with the integrand split as in the table
// construction (s-substitution near the turning point, log panels in z, and
// the stable V-kernel in place of nu/sqrt(-N) - 1/z).
inline Real amplitude_Mc_formula(const NonlinearityModel& model, Real c) {
  const Real cs = sound_speed(model);
  const Real nu2 = cs * cs - c * c;
  const Real nu = std::sqrt(nu2);
  const Real xi = xi_c(model, c);
  detail::ProfileTable table(model, c, xi, nu);
  const auto& q = detail::gauss8();
  // region A: int_0^{sA} [2 s nu/sqrt(-N) - 2 s/z] ds, -N = s^2 Y(s)
  const Real sA = std::sqrt(xi / 2.0);
  const int nA = 256;
  Real IA = 0;
  for (int j = 0; j < nA; ++j) {
    const Real a = sA * j / nA, b = sA * (j + 1) / nA;
    Real panel = 0;
    for (int i = 0; i < 8; ++i) {
      const Real s = 0.5 * (a + b) + 0.5 * (b - a) * q.x[i];
      const Real z = xi - s * s;
      panel += q.w[i] * (2.0 * nu / std::sqrt(table.Y(s)) - 2.0 * s / z);
    }
    IA += panel * 0.5 * (b - a);
  }
  // region B: int [nu/sqrt(W)-1] du = int e^u V(e^u)/(sqrt(W)(nu+sqrt(W))) du
  const int nB = 256;
  const Real u0 = std::log(xi / 2.0), u1 = std::log(std::max(xi * 1e-14, 1e-290));
  Real IB = 0;
  bool divergent = false;
  for (int j = 0; j < nB; ++j) {
    const Real a = u0 + (u1 - u0) * j / nB, b = u0 + (u1 - u0) * (j + 1) / nB;
    Real panel = 0;
    for (int i = 0; i < 8; ++i) {
      const Real u = 0.5 * (a + b) + 0.5 * (b - a) * q.x[i];
      const Real z = std::exp(u);
      const Real W = detail::kernel_W(model, c, z);
      if (!(W > 0)) {
        divergent = true;
        break;
      }
      const Real sw = std::sqrt(W);
      panel += q.w[i] * z * detail::kernel_V(model, z) / (sw * (nu + sw));
    }
    if (divergent) break;
    IB += panel * 0.5 * (b - a);  // note u decreasing: du negative; integrand*(du) ...
  }
  if (divergent) throw Error("amplitude_Mc: divergent integrand (speed too far below c_s)");
  // IB accumulated with positive weights over decreasing u; the z-integral
  // from 0 to xi/2 equals the u-integral from -inf to u0, so flip sign.
  IB = -IB;
  // remainder below z = xi*1e-14: integrand ~ z V(0)/(2 nu^2)
  const Real tail = std::exp(u1) * detail::kernel_V(model, 0.0) / (2.0 * nu2);
  return xi * std::exp(IA + IB + tail);
}

// Exact travelling-wave profile on the grid by quadrature; derivatives are
// spectral, residuals of both profile ODEs are recorded.
inline TravelingWave build_profile(const NonlinearityModel& model, Real c, GridPtr grid) {
  const Real cs = sound_speed(model);
  const Real nu2 = cs * cs - c * c;
  if (!(nu2 > 0)) throw Error("build_profile: speed outside (c1, c_s)");
  const Real nu = std::sqrt(nu2);
  if (grid->L < 40.0 / nu)
    throw Error("build_profile: grid half-length L=" + std::to_string(grid->L) +
                " below 40/nu_c=" + std::to_string(40.0 / nu));
  const Real xi = xi_c(model, c);

  TravelingWave w{grid, model};
  w.c = c;
  w.cs = cs;
  w.nu = nu;
  w.xi = xi;
  auto table = std::make_shared<detail::ProfileTable>(model, c, xi, nu);
  w.table = table;

  const int n = grid->n;
  w.eta.resize(n);
  w.v.resize(n);
  for (int i = 0; i < n; ++i) {
    const Real e = table->eta_at(std::abs(grid->x[i]));
    w.eta[i] = e;
    w.v[i] = c * e / (2.0 * (1.0 - e));
  }
  w.eta_x = spectral_derivative(*grid, w.eta, 1);
  w.eta_xx = spectral_derivative(*grid, w.eta, 2);
  w.eta_xxx = spectral_derivative(*grid, w.eta, 3);
  w.v_x = spectral_derivative(*grid, w.v, 1);

  Real ode = 0, fint = 0;
  int ode_arg = 0;
  for (int i = 0; i < n; ++i) {
    const Real z = w.eta[i];
    // stable forms: N'(z)/2 = -z R1(z) with R1 = eta''/eta, N(z) = -z^2 W(z)
    const Real lhs = -w.eta_xx[i];
    const Real rhs = -z * detail::kernel_R1(model, c, z);
    const Real r1 = std::abs(lhs - rhs);
    if (r1 > ode) {
      ode = r1;
      ode_arg = i;
    }
    const Real r2 = std::abs(w.eta_x[i] * w.eta_x[i] - z * z * detail::kernel_W(model, c, z));
    fint = std::max(fint, r2);
  }
  w.ode_residual = ode;
  w.first_integral_residual = fint;
  if (ode > 1e-6)
    throw Error("build_profile: ODE residual " + std::to_string(ode) + " above tolerance at x=" +
                std::to_string(grid->x[ode_arg]));

  // tail diagnostics on the right half, window eta/xi in [1e-8, 1e-4]
  {
    std::vector<Real> xs, ls, amps;
    for (int i = grid->index_of_zero(); i < n; ++i) {
      const Real r = w.eta[i] / xi;
      if (r >= 1e-8 && r <= 1e-4) {
        xs.push_back(grid->x[i]);
        ls.push_back(std::log(w.eta[i]));
        amps.push_back(w.eta[i] * std::exp(nu * grid->x[i]));
      }
    }
    if (xs.size() >= 4) {
      Real sx = 0, sy = 0, sxx = 0, sxy = 0;
      const Real m = static_cast<Real>(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ls[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ls[i];
      }
      const Real slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      w.decay_rate_fit = -slope;
      Real gm = 0;
      for (Real a : amps) gm += std::log(a);
      w.amplitude_tail_fit = std::exp(gm / m);
    }
  }
  w.amplitude_Mc = amplitude_Mc_formula(model, c);
  return w;
}

// u_c = sqrt(1-eta) e^{-i Phi}, Phi(x) = int_0^x v (cumulative spectral
// quadrature; the nonzero mean of v contributes the linear-in-x part).
inline CField classical_wave(const TravelingWave& w) {
  const Grid& g = *w.grid;
  const Real vbar = mean(g, w.v);
  Field vt = w.v;
  for (auto& y : vt) y -= vbar;
  const Field P = antiderivative_zero_at_origin(g, vt);
  CField psi(g.n);
  for (int i = 0; i < g.n; ++i) {
    const Real phi = vbar * g.x[i] + P[i];
    psi[i] = std::sqrt(1.0 - w.eta[i]) * std::exp(Complex(0.0, -phi));
  }
  return psi;
}

// Total phase jump int_R v_c (needed for the gauge twist of classical runs).
inline Real phase_jump(const TravelingWave& w) { return integrate(*w.grid, w.v); }

// d/dc p(Q_c) by centered difference over the branch; negative on the branch.
inline Real momentum_speed_derivative(const NonlinearityModel& model, Real c, Real dc,
                                      GridPtr grid) {
  auto p_of = [&](Real cc) {
    TravelingWave w = build_profile(model, cc, grid);
    Real s = 0;
    for (int i = 0; i < grid->n; ++i) s += w.eta[i] * w.v[i];
    return 0.5 * s * grid->dx;
  };
  return (p_of(c + dc) - p_of(c - dc)) / (2.0 * dc);
}

inline Real momentum_of_wave(const TravelingWave& w) {
  Real s = 0;
  for (int i = 0; i < w.grid->n; ++i) s += w.eta[i] * w.v[i];
  return 0.5 * s * w.grid->dx;
}

}  // namespace soliton_lab

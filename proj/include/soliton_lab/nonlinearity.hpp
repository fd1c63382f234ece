#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>

#include "soliton_lab/common.hpp"

namespace soliton_lab {

struct NonlinearityDerivatives {
  Real f = 0, fp = 0, fpp = 0, fppp = 0;
};

// Defocusing nonlinearity with derivatives to order three and the potential
// F(rho) = int_rho^1 f. Construction enforces f(1) = 0 and f'(1) < 0;
// everything downstream may assume both.
class NonlinearityModel {
 public:
  using EvalFn = std::function<NonlinearityDerivatives(Real)>;
  using PotentialFn = std::function<Real(Real)>;

  NonlinearityModel(std::string name, EvalFn eval, std::optional<PotentialFn> closed_F = {},
                    std::map<std::string, Real> params = {})
      : name_(std::move(name)), params_(std::move(params)), eval_(std::move(eval)),
        closed_F_(std::move(closed_F)) {
    const auto d1 = eval_(1.0);
    if (std::abs(d1.f) > 1e-12)
      throw Error("nonlinearity '" + name_ + "': background condition f(1)=0 violated, f(1)=" +
                  std::to_string(d1.f));
    if (!(d1.fp < 0))
      throw Error("nonlinearity '" + name_ + "': not defocusing, f'(1)=" + std::to_string(d1.fp) +
                  " must be negative");
  }

  const std::string& name() const { return name_; }
  const std::map<std::string, Real>& params() const { return params_; }
  NonlinearityDerivatives eval(Real rho) const { return eval_(rho); }
  Real f(Real rho) const { return eval_(rho).f; }
  Real fp(Real rho) const { return eval_(rho).fp; }
  Real fpp(Real rho) const { return eval_(rho).fpp; }
  Real fppp(Real rho) const { return eval_(rho).fppp; }
  bool has_closed_potential() const { return closed_F_.has_value(); }
  Real closed_potential(Real rho) const { return (*closed_F_)(rho); }

 private:
  std::string name_;
  std::map<std::string, Real> params_;
  EvalFn eval_;
  std::optional<PotentialFn> closed_F_;
};

// Gross-Pitaevskii: f(s) = 1 - s, F(rho) = (1-rho)^2/2.
inline NonlinearityModel gp_model() {
  return NonlinearityModel(
      "gp", [](Real rho) { return NonlinearityDerivatives{1.0 - rho, -1.0, 0.0, 0.0}; },
      [](Real rho) { return 0.5 * (1.0 - rho) * (1.0 - rho); });
}

// f(s) = (1-s) + beta (1-s)^2, F(rho) = (1-rho)^2/2 + beta (1-rho)^3/3.
// k = 4 beta - 6 takes both signs across beta = 3/2.
inline NonlinearityModel beta_family_model(Real beta) {
  return NonlinearityModel(
      "beta_family",
      [beta](Real rho) {
        const Real u = 1.0 - rho;
        return NonlinearityDerivatives{u + beta * u * u, -1.0 - 2.0 * beta * u, 2.0 * beta, 0.0};
      },
      [beta](Real rho) {
        const Real u = 1.0 - rho;
        return 0.5 * u * u + beta * u * u * u / 3.0;
      },
      {{"beta", beta}});
}

inline NonlinearityModel make_model(const std::string& id, const std::map<std::string, Real>& params) {
  if (id == "gp") return gp_model();
  if (id == "beta_family") {
    auto it = params.find("beta");
    if (it == params.end()) throw Error("model 'beta_family' needs parameter beta");
    return beta_family_model(it->second);
  }
  throw Error("unknown nonlinearity model '" + id + "'");
}

namespace detail {

inline Real adaptive_simpson(const std::function<Real(Real)>& f, Real a, Real b, Real fa, Real fm,
                             Real fb, Real whole, Real tol, int depth) {
  const Real m = 0.5 * (a + b);
  const Real lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const Real flm = f(lm), frm = f(rm);
  const Real left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Real right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline Real adaptive_quadrature(const std::function<Real(Real)>& f, Real a, Real b, Real tol) {
  if (a == b) return 0.0;
  const Real fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const Real whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

// F(rho) = int_rho^1 f(r) dr, closed form when the model provides one.
inline Real potential_F(const NonlinearityModel& model, Real rho) {
  if (model.has_closed_potential()) return model.closed_potential(rho);
  return detail::adaptive_quadrature([&](Real r) { return model.f(r); }, rho, 1.0, 1e-14);
}

// c_s = sqrt(-2 f'(1)).
inline Real sound_speed(const NonlinearityModel& model) {
  const Real fp1 = model.fp(1.0);
  if (!(fp1 < 0)) throw Error("sound_speed: model not defocusing (f'(1) >= 0)");
  return std::sqrt(-2.0 * fp1);
}

// k = 2 f''(1) + 6 f'(1); transonic profiles need k < 0.
inline Real transonic_coefficient(const NonlinearityModel& model) {
  return 2.0 * model.fpp(1.0) + 6.0 * model.fp(1.0);
}

struct HypothesisReport {
  bool h0_sampled_ok = false;
  bool h1_ok = false;
  bool h2_ok = false;
  bool h3_ok = false;
  Real fitted_M = 0, fitted_qstar = 0;   // H2 bound F <= M |1-rho|^q*
  Real fitted_C0 = 0, fitted_alpha1 = 0; // H0 bound |f''| <= C0 / rho^{3-a1}
  Real transonic_k = 0;
  Real worst_violation_rho = 0;
  Real worst_violation_margin = 1e300;  // most negative (bound-value)/scale seen
};

namespace detail {

struct LogFit {
  Real intercept = 0, slope = 0;
  bool ok = false;
};

inline LogFit least_squares_loglog(const std::vector<Real>& xs, const std::vector<Real>& ys) {
  LogFit out;
  std::vector<Real> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0 && ys[i] > 0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  if (lx.size() < 2) return out;
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  const Real m = static_cast<Real>(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const Real den = m * sxx - sx * sx;
  if (std::abs(den) < 1e-300) {
    // all abscissas equal; degenerate fit, treat slope 0
    out.intercept = sy / m;
    out.slope = 0;
    out.ok = true;
    return out;
  }
  out.slope = (m * sxy - sx * sy) / den;
  out.intercept = (sy - out.slope * sx) / m;
  out.ok = true;
  return out;
}

}  // namespace detail

// Pointwise checks of (H0)-(H3) on a sample set. H3 is exact; H0/H2 use
// least-squares fits on log-transformed samples and hold when the fitted
// bound covers every sample with 1% slack. Report-only.
inline HypothesisReport check_hypotheses(const NonlinearityModel& model,
                                         const std::vector<Real>& rho_samples) {
  if (rho_samples.empty()) throw Error("check_hypotheses: empty sample set");
  Real rho_max = 0;
  for (Real r : rho_samples) rho_max = std::max(rho_max, r);
  if (rho_max < 4.0) throw Error("check_hypotheses: samples must reach rho_max >= 4");

  HypothesisReport rep;
  const Real slack = 0.01;
  const Real cs = sound_speed(model);
  rep.transonic_k = transonic_coefficient(model);
  rep.h3_ok = rep.transonic_k < 0;

  auto note_violation = [&](Real rho, Real bound, Real value) {
    const Real scale = std::max({std::abs(bound), std::abs(value), Real(1e-30)});
    const Real margin = (bound - value) / scale;
    if (margin < rep.worst_violation_margin) {
      rep.worst_violation_margin = margin;
      rep.worst_violation_rho = rho;
    }
    return margin >= -slack;
  };

  // (H1): cs^2/4 (1-rho)^2 <= F(rho) for all rho.
  rep.h1_ok = true;
  for (Real rho : rho_samples) {
    const Real lower = cs * cs / 4.0 * (1.0 - rho) * (1.0 - rho);
    const Real val = potential_F(model, rho);
    if (!note_violation(rho, val, lower)) rep.h1_ok = false;  // need val >= lower
  }

  // (H2): F(rho) <= M |1-rho|^{q*} for rho >= 2, q* in [2, inf).
  {
    std::vector<Real> xs, ys;
    for (Real rho : rho_samples)
      if (rho >= 2.0) {
        const Real val = potential_F(model, rho);
        if (val > 0) {
          xs.push_back(std::abs(1.0 - rho));
          ys.push_back(val);
        }
      }
    auto fit = detail::least_squares_loglog(xs, ys);
    rep.fitted_qstar = fit.ok ? std::max(fit.slope, Real(2.0)) : 2.0;
    rep.fitted_M = fit.ok ? std::exp(fit.intercept) : 1.0;
    rep.h2_ok = true;
    for (Real rho : rho_samples)
      if (rho >= 2.0) {
        const Real val = potential_F(model, rho);
        const Real bound = rep.fitted_M * std::pow(std::abs(1.0 - rho), rep.fitted_qstar);
        if (!note_violation(rho, bound, val)) rep.h2_ok = false;
      }
  }

  // (H0): |f''(rho)| <= C0 / rho^{3-alpha1} for rho >= 1, alpha1 >= 1.
  {
    std::vector<Real> xs, ys;
    Real max_abs_fpp = 0;
    for (Real rho : rho_samples)
      if (rho >= 1.0) {
        const Real a = std::abs(model.fpp(rho));
        max_abs_fpp = std::max(max_abs_fpp, a);
        if (a > 0) {
          xs.push_back(rho);
          ys.push_back(a);
        }
      }
    if (max_abs_fpp == 0) {
      rep.h0_sampled_ok = true;  // |f''| identically zero on samples
      rep.fitted_C0 = 0;
      rep.fitted_alpha1 = 1.0;
    } else {
      auto fit = detail::least_squares_loglog(xs, ys);
      rep.fitted_alpha1 = fit.ok ? std::max(3.0 + fit.slope, Real(1.0)) : 1.0;
      rep.fitted_C0 = fit.ok ? std::exp(fit.intercept) : max_abs_fpp;
      rep.h0_sampled_ok = true;
      for (Real rho : rho_samples)
        if (rho >= 1.0) {
          const Real val = std::abs(model.fpp(rho));
          const Real bound = rep.fitted_C0 * std::pow(rho, rep.fitted_alpha1 - 3.0);
          if (!note_violation(rho, bound, val)) rep.h0_sampled_ok = false;
        }
    }
  }
  return rep;
}

}  // namespace soliton_lab

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace soliton_lab {

using Real = double;
using Complex = std::complex<double>;
using Field = std::vector<Real>;
using CField = std::vector<Complex>;

inline constexpr Real kPi = 3.14159265358979323846;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// 16-point Gauss-Legendre rule on [0,1]; used by the smooth coefficient
// kernels (integral-remainder forms of F(1-eta)/eta^2 and friends).
struct Gauss16 {
  std::array<Real, 16> t;
  std::array<Real, 16> w;
};

inline const Gauss16& gauss16() {
  static const Gauss16 g = [] {
    // nodes/weights on [-1,1], mapped to [0,1]
    const std::array<Real, 8> xs = {
        0.0950125098376374401853193, 0.2816035507792589132304605,
        0.4580167776572273863424194, 0.6178762444026437484466718,
        0.7554044083550030338951012, 0.8656312023878317438804679,
        0.9445750230732325760779884, 0.9894009349916499325961542};
    const std::array<Real, 8> ws = {
        0.1894506104550684962853967, 0.1826034150449235888667637,
        0.1691565193950025381893121, 0.1495959888165767320815017,
        0.1246289712555338720524763, 0.0951585116824927848099251,
        0.0622535239386478928628438, 0.0271524594117540948517806};
    Gauss16 out{};
    for (int i = 0; i < 8; ++i) {
      out.t[2 * i] = 0.5 * (1.0 - xs[i]);
      out.t[2 * i + 1] = 0.5 * (1.0 + xs[i]);
      out.w[2 * i] = 0.5 * ws[i];
      out.w[2 * i + 1] = 0.5 * ws[i];
    }
    return out;
  }();
  return g;
}

// 8-point Gauss-Legendre on [-1,1]; used for cumulative panel quadrature.
struct Gauss8 {
  std::array<Real, 8> x;
  std::array<Real, 8> w;
};

inline const Gauss8& gauss8() {
  static const Gauss8 g = {
      {-0.9602898564975362316835609, -0.7966664774136267395915539,
       -0.5255324099163289858177390, -0.1834346424956498049394761,
       0.1834346424956498049394761, 0.5255324099163289858177390,
       0.7966664774136267395915539, 0.9602898564975362316835609},
      {0.1012285362903762591525314, 0.2223810344533744705443560,
       0.3137066458778872873379622, 0.3626837833783619829651504,
       0.3626837833783619829651504, 0.3137066458778872873379622,
       0.2223810344533744705443560, 0.1012285362903762591525314}};
  return g;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace detail

}  // namespace soliton_lab

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "whf/expr.hpp"
#include "whf/problem.hpp"

namespace whf::test {

inline constexpr Complex kI{0.0, 1.0};

// sqrt(z) with the cut on the positive imaginary axis: arg z in (-3pi/2, pi/2].
inline Complex sqrt_up(Complex z) { return std::polar(1.0, -kPi / 4) * std::sqrt(kI * z); }
// sqrt(z) with the cut on the negative imaginary axis: arg z in (-pi/2, 3pi/2].
inline Complex sqrt_down(Complex z) { return std::polar(1.0, kPi / 4) * std::sqrt(-kI * z); }

inline const Complex kKhrapkovK1{0.5, 1.0};

// sqrt(k^2 + 0.75 - i) = sqrt(k - k1) sqrt(k + k1), vertical cuts from +-k1.
inline Complex khrapkov_psi(Complex k) {
  return sqrt_up(k - kKhrapkovK1) * sqrt_down(k + kKhrapkovK1);
}
// sqrt(k^2 - 1), vertical cuts from +-1.
inline Complex antipov_psi(Complex k) { return sqrt_up(k - 1.0) * sqrt_down(k + 1.0); }

inline const std::string kKhrapkovPsi = "sqrt(k^2 + 0.75 - 1i; up=0.5+1i, down=-0.5-1i; sign=+)";
inline const std::string kAntipovPsi = "sqrt(k^2 - 1; up=1, down=-1; sign=+)";

inline FactorizationProblem khrapkov() {
  const std::string g0 = "1 + 40*k*" + kKhrapkovPsi + "/(k+1.5i)^6";
  const std::string g1 = "600*k*" + kKhrapkovPsi + "/(k+1.5i)^8";
  return FactorizationProblem::moiseev(2, {parse("1"), parse("k"), parse("k"), parse("-1")},
                                       {parse(g0), parse(g1)}, {kKhrapkovK1});
}

inline Complex antipov_g0(Complex k, Complex psi) {
  const Complex q = std::pow(k, 4) - 16.0;
  return ((psi - 0.25) * q - 0.3 * 16.0) / (psi * q);
}
inline Complex antipov_g1(Complex k, Complex psi) {
  return 0.25 / (psi * (std::pow(k, 4) - 16.0));
}

inline FactorizationProblem antipov() {
  const std::string q = "(k^4 - 16)";
  const std::string g0 = "((" + kAntipovPsi + " - 0.25)*" + q + " - 0.3*16)/(" + kAntipovPsi + "*" + q + ")";
  const std::string g1 = "0.25/(" + kAntipovPsi + "*" + q + ")";
  return FactorizationProblem::moiseev(
      2, {parse("k^4 - 16"), parse("19.2"), parse("19.2"), parse("-k^4 + 16")},
      {parse(g0), parse(g1)}, {Complex{1.0, 0.0}});
}

inline const std::vector<Complex> kAntipovPoles = {{2, 1}, {2, -1}, {0, -1}, {-1, 1}, {-1, -1}};

inline ComplexMat khrapkov_lambda(Complex k) { return {{1.0, k}, {k, -1.0}}; }
inline ComplexMat antipov_lambda(Complex k) {
  const Complex q = std::pow(k, 4) - 16.0;
  return {{q, 19.2}, {19.2, -q}};
}

}  // namespace whf::test

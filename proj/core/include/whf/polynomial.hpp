#pragma once

#include <span>
#include <vector>

#include "whf/cmatrix.hpp"

namespace whf {

/// Dense complex polynomial, coefficients in ascending powers of k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Complex> coeffs);
  static Polynomial constant(Complex c) { return Polynomial({c}); }
  static Polynomial monomial(std::size_t power);
  /// Monic polynomial with the given roots.
  static Polynomial from_roots(std::span<const Complex> roots);

  /// Degree after trimming exact zeros; the zero polynomial has degree 0.
  [[nodiscard]] std::size_t degree() const noexcept;
  [[nodiscard]] bool is_zero() const noexcept;
  [[nodiscard]] const std::vector<Complex>& coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] Complex leading() const noexcept;

  [[nodiscard]] Complex operator()(Complex k) const noexcept;
  [[nodiscard]] Polynomial derivative() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Complex s, Polynomial p);

 private:
  void trim();
  std::vector<Complex> coeffs_{Complex{}};
};

}  // namespace whf

#include "whf/polynomial.hpp"

#include <algorithm>

namespace whf {

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(Complex{});
  trim();
}

Polynomial Polynomial::monomial(std::size_t power) {
  std::vector<Complex> c(power + 1, Complex{});
  c.back() = 1.0;
  return Polynomial(std::move(c));
}

Polynomial Polynomial::from_roots(std::span<const Complex> roots) {
  Polynomial p = constant(1.0);
  for (Complex r : roots) p = p * Polynomial({-r, 1.0});
  return p;
}

void Polynomial::trim() {
  while (coeffs_.size() > 1 && coeffs_.back() == Complex{}) coeffs_.pop_back();
}

std::size_t Polynomial::degree() const noexcept { return coeffs_.size() - 1; }

bool Polynomial::is_zero() const noexcept {
  return coeffs_.size() == 1 && coeffs_[0] == Complex{};
}

Complex Polynomial::leading() const noexcept { return coeffs_.back(); }

Complex Polynomial::operator()(Complex k) const noexcept {
  Complex acc{};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * k + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() == 1) return constant(0.0);
  std::vector<Complex> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
  return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<Complex> c(std::max(a.coeffs_.size(), b.coeffs_.size()), Complex{});
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<Complex> c(a.coeffs_.size() + b.coeffs_.size() - 1, Complex{});
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(Complex s, Polynomial p) {
  for (auto& c : p.coeffs_) c *= s;
  p.trim();
  return p;
}

}  // namespace whf

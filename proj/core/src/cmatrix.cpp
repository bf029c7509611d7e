#include "whf/cmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "whf/error.hpp"

namespace whf {

ComplexMat::ComplexMat(std::size_t dim) : dim_(dim), data_(dim * dim, Complex{}) {}

ComplexMat::ComplexMat(std::initializer_list<std::initializer_list<Complex>> rows)
    : dim_(rows.size()), data_() {
  data_.reserve(dim_ * dim_);
  for (const auto& row : rows) {
    if (row.size() != dim_) {
      throw Error(ErrorCode::InvalidArgument, "ComplexMat initializer must be square");
    }
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMat ComplexMat::identity(std::size_t dim) {
  ComplexMat m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMat ComplexMat::diagonal(std::span<const Complex> values) {
  ComplexMat m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMat& ComplexMat::operator+=(const ComplexMat& other) {
  if (other.dim_ != dim_) throw Error(ErrorCode::InvalidArgument, "dimension mismatch in +");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMat& ComplexMat::operator-=(const ComplexMat& other) {
  if (other.dim_ != dim_) throw Error(ErrorCode::InvalidArgument, "dimension mismatch in -");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMat& ComplexMat::operator*=(Complex scalar) {
  for (auto& v : data_) v *= scalar;
  return *this;
}

double ComplexMat::norm_inf() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) row += std::abs((*this)(i, j));
    best = std::max(best, row);
  }
  return best;
}

double ComplexMat::max_abs() const noexcept {
  double best = 0.0;
  for (const auto& v : data_) best = std::max(best, std::abs(v));
  return best;
}

bool ComplexMat::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](Complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

Complex ComplexMat::trace() const noexcept {
  Complex t{};
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

ComplexMat operator+(ComplexMat lhs, const ComplexMat& rhs) { return lhs += rhs; }
ComplexMat operator-(ComplexMat lhs, const ComplexMat& rhs) { return lhs -= rhs; }
ComplexMat operator-(ComplexMat m) { return m *= -1.0; }

ComplexMat operator*(const ComplexMat& lhs, const ComplexMat& rhs) {
  const std::size_t n = lhs.dim();
  if (rhs.dim() != n) throw Error(ErrorCode::InvalidArgument, "dimension mismatch in *");
  ComplexMat out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex a = lhs(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

ComplexMat operator*(Complex scalar, ComplexMat m) { return m *= scalar; }
ComplexMat operator*(ComplexMat m, Complex scalar) { return m *= scalar; }
ComplexMat operator/(ComplexMat m, Complex scalar) { return m *= (1.0 / scalar); }

ComplexMat commutator(const ComplexMat& a, const ComplexMat& b) { return a * b - b * a; }

Complex det(const ComplexMat& m) {
  const std::size_t n = m.dim();
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  // LU with partial pivoting.
  ComplexMat a = m;
  Complex result = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    }
    if (a(pivot, c) == Complex{}) return Complex{};
    if (pivot != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(pivot, j));
      result = -result;
    }
    result *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const Complex f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return result;
}

ComplexMat mat_inv(const ComplexMat& m, const InverseOptions& opts) {
  const std::size_t n = m.dim();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "mat_inv of empty matrix");
  const double scale = m.max_abs();
  const Complex d = det(m);
  if (scale == 0.0 || !std::isfinite(std::abs(d)) ||
      std::abs(d) <= opts.singular_threshold * std::pow(scale, static_cast<double>(n))) {
    throw Error(ErrorCode::SingularMatrix,
                "|det| = " + std::to_string(std::abs(d)) + " at entry scale " +
                    std::to_string(scale));
  }
  if (n == 1) return ComplexMat{{1.0 / m(0, 0)}};
  if (n == 2) {
    return ComplexMat{{m(1, 1) / d, -m(0, 1) / d}, {-m(1, 0) / d, m(0, 0) / d}};
  }
  // Gauss-Jordan with partial pivoting.
  ComplexMat a = m;
  ComplexMat inv = ComplexMat::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(c, j), a(pivot, j));
      std::swap(inv(c, j), inv(pivot, j));
    }
    const Complex p = 1.0 / a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) *= p;
      inv(c, j) *= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const Complex f = a(r, c);
      if (f == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

namespace {

bool eigen_less(Complex a, Complex b, double tol) {
  if (std::abs(a.real() - b.real()) > tol) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Scales v so that v[0] == 1, or its largest component == 1 when v[0] is
// negligible.
void normalize_vector(std::vector<Complex>& v) {
  double norm = 0.0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    norm = std::max(norm, std::abs(v[i]));
    if (std::abs(v[i]) > std::abs(v[largest])) largest = i;
  }
  const std::size_t anchor = std::abs(v[0]) > 1e-8 * norm ? 0 : largest;
  const Complex s = 1.0 / v[anchor];
  for (auto& x : v) x *= s;
  v[anchor] = 1.0;
}

std::vector<Complex> eigenvalues_2x2(const ComplexMat& m) {
  const Complex a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const Complex tr = a + d;
  const Complex disc = std::sqrt((a - d) * (a - d) + 4.0 * b * c);
  // Avoid cancellation: take the larger root directly, the other via det.
  const Complex big = std::abs(tr + disc) >= std::abs(tr - disc) ? (tr + disc) / 2.0
                                                                 : (tr - disc) / 2.0;
  const Complex dt = a * d - b * c;
  const Complex small = big != Complex{} ? dt / big : Complex{};
  return {big, small};
}

std::vector<Complex> eigenvalues_general(const ComplexMat& m) {
  const auto n = static_cast<Eigen::Index>(m.dim());
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return out;
}

void sort_values(std::vector<Complex>& values) {
  double scale = 0.0;
  for (auto v : values) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  std::sort(values.begin(), values.end(),
            [tol](Complex x, Complex y) { return eigen_less(x, y, tol); });
}

}  // namespace

std::vector<Complex> eigenvalues(const ComplexMat& m) {
  std::vector<Complex> values =
      m.dim() == 1 ? std::vector<Complex>{m(0, 0)}
                   : (m.dim() == 2 ? eigenvalues_2x2(m) : eigenvalues_general(m));
  sort_values(values);
  return values;
}

EigenPair eig(const ComplexMat& m, const EigOptions& opts) {
  const std::size_t n = m.dim();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "eig of empty matrix");
  if (!m.all_finite()) throw Error(ErrorCode::InvalidArgument, "eig of non-finite matrix");

  std::vector<Complex> values = eigenvalues(m);
  double scale = 0.0;
  for (auto v : values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = std::abs(values[i] - values[j]);
      if (scale == 0.0 || gap < opts.degeneracy_threshold * scale) {
        throw Error(ErrorCode::DegenerateEigenvalues,
                    "eigenvalue gap " + std::to_string(gap) + " at scale " +
                        std::to_string(scale));
      }
    }
  }

  EigenPair out{ComplexMat(n), values};
  if (n == 1) {
    out.vectors(0, 0) = 1.0;
    return out;
  }
  if (n == 2) {
    const Complex a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    for (std::size_t col = 0; col < 2; ++col) {
      const Complex lam = values[col];
      std::vector<Complex> v1{b, lam - a};
      std::vector<Complex> v2{lam - d, c};
      const double n1 = std::abs(v1[0]) + std::abs(v1[1]);
      const double n2 = std::abs(v2[0]) + std::abs(v2[1]);
      std::vector<Complex> v = n1 >= n2 ? v1 : v2;
      normalize_vector(v);
      out.vectors(0, col) = v[0];
      out.vectors(1, col) = v[1];
    }
    return out;
  }

  // N > 2: Eigen's eigenvectors, reordered to match our eigenvalue order.
  const auto en = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd a(en, en);
  for (Eigen::Index i = 0; i < en; ++i)
    for (Eigen::Index j = 0; j < en; ++j) a(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, true);
  std::vector<bool> used(n, false);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = n;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (used[k]) continue;
      const double dist = std::abs(solver.eigenvalues()(static_cast<Eigen::Index>(k)) - values[col]);
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    used[best] = true;
    std::vector<Complex> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = solver.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best));
    normalize_vector(v);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, col) = v[i];
  }
  return out;
}

Complex log_near(Complex value, Complex reference) {
  if (value == Complex{}) throw Error(ErrorCode::LogOfZero, "logarithm of zero");
  const Complex principal = std::log(value);
  const double turns = std::round((reference.imag() - principal.imag()) / (2.0 * kPi));
  return principal + Complex{0.0, 2.0 * kPi * turns};
}

std::vector<Complex> diag_log_near(std::span<const Complex> values,
                                   std::span<const Complex> reference) {
  if (values.size() != reference.size()) {
    throw Error(ErrorCode::InvalidArgument, "diag_log_near: size mismatch");
  }
  std::vector<Complex> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = log_near(values[i], reference[i]);
  return out;
}

std::vector<std::size_t> best_matching(std::span<const Complex> a, std::span<const Complex> b,
                                       double* best_cost, double* second_best) {
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_c = std::numeric_limits<double>::infinity();
  double second_c = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += std::abs(a[perm[i]] - b[i]);
    if (cost < best_c) {
      second_c = best_c;
      best_c = cost;
      best = perm;
    } else if (cost < second_c) {
      second_c = cost;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best_cost) *best_cost = best_c;
  if (second_best) *second_best = second_c;
  return best;
}

}  // namespace whf

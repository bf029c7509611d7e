#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace whf {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kTwoPiI{0.0, 2.0 * kPi};

/// Dense N x N complex matrix with value semantics. Sized for the small
/// matrices of a Wiener-Hopf problem (N = 2 in practice), not for
/// large-scale linear algebra.
class ComplexMat {
 public:
  ComplexMat() = default;
  explicit ComplexMat(std::size_t dim);
  /// Row-major nested initializer, e.g. {{1, 0}, {0, 1}}.
  ComplexMat(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMat identity(std::size_t dim);
  static ComplexMat zero(std::size_t dim) { return ComplexMat(dim); }
  static ComplexMat diagonal(std::span<const Complex> values);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] bool empty() const noexcept { return dim_ == 0; }

  Complex& operator()(std::size_t row, std::size_t col) { return data_[row * dim_ + col]; }
  const Complex& operator()(std::size_t row, std::size_t col) const {
    return data_[row * dim_ + col];
  }

  [[nodiscard]] std::span<const Complex> data() const noexcept { return data_; }

  ComplexMat& operator+=(const ComplexMat& other);
  ComplexMat& operator-=(const ComplexMat& other);
  ComplexMat& operator*=(Complex scalar);

  /// Maximum absolute row sum.
  [[nodiscard]] double norm_inf() const noexcept;
  /// Largest entry modulus.
  [[nodiscard]] double max_abs() const noexcept;
  [[nodiscard]] bool all_finite() const noexcept;
  [[nodiscard]] Complex trace() const noexcept;

  friend bool operator==(const ComplexMat&, const ComplexMat&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> data_;
};

ComplexMat operator+(ComplexMat lhs, const ComplexMat& rhs);
ComplexMat operator-(ComplexMat lhs, const ComplexMat& rhs);
ComplexMat operator-(ComplexMat m);
ComplexMat operator*(const ComplexMat& lhs, const ComplexMat& rhs);
ComplexMat operator*(Complex scalar, ComplexMat m);
ComplexMat operator*(ComplexMat m, Complex scalar);
ComplexMat operator/(ComplexMat m, Complex scalar);

/// [a, b] = ab - ba
ComplexMat commutator(const ComplexMat& a, const ComplexMat& b);

Complex det(const ComplexMat& m);

struct InverseOptions {
  /// |det| below threshold * (max |entry|)^N counts as singular.
  double singular_threshold = 1e-12;
};

/// Throws Error{SingularMatrix}.
ComplexMat mat_inv(const ComplexMat& m, const InverseOptions& opts = {});

/// Columns are eigenvectors scaled so their first component is 1 (when that
/// component is numerically nonzero; otherwise the largest component is 1).
/// Eigenvalues are ordered by real part, ties broken by imaginary part.
struct EigenPair {
  ComplexMat vectors;
  std::vector<Complex> values;
};

struct EigOptions {
  /// Minimum pairwise eigenvalue gap relative to the largest |eigenvalue|.
  double degeneracy_threshold = 1e-9;
};

/// Closed form for N = 2, Eigen's complex QR iteration otherwise.
/// Throws Error{DegenerateEigenvalues}.
EigenPair eig(const ComplexMat& m, const EigOptions& opts = {});

/// Eigenvalues only, in the same order convention as eig(); never throws on
/// degeneracy.
std::vector<Complex> eigenvalues(const ComplexMat& m);

/// Logarithms of `values` on the branch closest to `reference`, elementwise:
/// result[i] = Log(values[i]) + 2 pi i n_i with n_i minimizing the distance
/// to reference[i]. Throws Error{LogOfZero}.
std::vector<Complex> diag_log_near(std::span<const Complex> values,
                                   std::span<const Complex> reference);

/// Scalar form of diag_log_near.
Complex log_near(Complex value, Complex reference);

/// Permutation p minimizing sum_i |a[p[i]] - b[i]| (brute force over N!).
/// `second_best` receives the cost of the runner-up permutation when non-null.
std::vector<std::size_t> best_matching(std::span<const Complex> a, std::span<const Complex> b,
                                       double* best_cost = nullptr,
                                       double* second_best = nullptr);

}  // namespace whf
